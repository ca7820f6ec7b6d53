use std::fmt::Write;

/// Human-readable lines, pass/fail sub-checks and a trailing `key=value`
/// summary block.
#[derive(Default)]
pub struct Report {
    lines: Vec<String>,
    checks: Vec<(String, bool)>,
    summary: Vec<(String, String)>,
}

impl Report {
    pub fn new(title: &str) -> Self {
        let mut r = Report::default();
        r.line(format!("== {title} =="));
        r
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    pub fn check(&mut self, name: &str, tol: Option<f64>, passed: bool, detail: impl AsRef<str>) {
        let verdict = if passed { "PASS" } else { "FAIL" };
        let tol = tol.map(|t| format!(" tol={t:e}")).unwrap_or_default();
        let detail = detail.as_ref();
        let sep = if detail.is_empty() { "" } else { " " };
        self.lines.push(format!("check {name}: {verdict}{tol}{sep}{detail}"));
        self.checks.push((name.to_string(), passed));
    }

    pub fn kv(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            writeln!(out, "{l}").unwrap();
        }
        writeln!(out, "[summary]").unwrap();
        for (k, v) in &self.summary {
            writeln!(out, "{k}={v}").unwrap();
        }
        let passed = self.checks.iter().filter(|(_, ok)| *ok).count();
        writeln!(out, "checks_passed={passed}").unwrap();
        writeln!(out, "checks_total={}", self.checks.len()).unwrap();
        writeln!(out, "status={}", if self.passed() { "pass" } else { "fail" }).unwrap();
        out
    }
}

pub fn sci(x: f64) -> String {
    format!("{x:.3e}")
}
