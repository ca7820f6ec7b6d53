//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use pullback_core::constsigma;
use pullback_core::cubic;
use pullback_core::moduli::{self, chart_distance};
use pullback_core::portrait::examples;
use pullback_core::solver::{inverse_branch_rate, pullback_orbit};
use pullback_core::sphere::{self, Point};
use pullback_core::{Complex64, GfMap, ModuliVector};

const BIN: &str = env!("CARGO_BIN_EXE_pullback-lab");

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(name)
}

struct Run {
    code: i32,
    stdout: String,
    elapsed: Duration,
}

fn run(args: &[&str], threads: Option<&str>) -> Run {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("PULLBACKLAB_THREADS", t);
    }
    let start = Instant::now();
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        elapsed: start.elapsed(),
    }
}

fn summary_value<'a>(stdout: &'a str, key: &str) -> Option<&'a str> {
    let block = stdout.split("[summary]\n").nth(1)?;
    block.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
}

/// Roots of c³ + 2c² + c + 1 by Cardano's formula.
fn rabbit_parameters() -> [Complex64; 3] {
    let (p, q) = (-1.0 / 3.0, 25.0 / 27.0);
    let disc = (q / 2.0f64).powi(2) + (p / 3.0f64).powi(3);
    let u = (-q / 2.0 + disc.sqrt()).cbrt();
    let v = (-q / 2.0 - disc.sqrt()).cbrt();
    let re = -(u + v) / 2.0 - 2.0 / 3.0;
    let im = (u - v) * 3f64.sqrt() / 2.0;
    [
        Complex64::new(u + v - 2.0 / 3.0, 0.0),
        Complex64::new(re, im),
        Complex64::new(re, -im),
    ]
}

fn jacobian_identity() -> Outcome {
    let start = Instant::now();
    let rabbit = GfMap::build(&examples::rabbit()).unwrap();
    let r = moduli::jacobian_identity_check(&rabbit, 100, 0);
    let p4 = GfMap::build(&examples::quadratic_period(4)).unwrap();
    let q = moduli::jacobian_identity_check(&p4, 100, 0);
    let cli = run(&["gf", "jac-check", preset("rabbit.toml").to_str().unwrap(), "--samples", "100"], None);
    let elapsed = start.elapsed();
    let ok = r.relative_spread < 1e-6
        && (r.constant - Complex64::new(4.0, 0.0)).norm() < 1e-8
        && q.relative_spread < 1e-6
        && cli.code == 0
        && elapsed < Duration::from_secs(5);
    outcome(
        ok,
        format!(
            "rabbit c={} spread={:.2e}; period-4 c={} spread={:.2e}; cli exit {}; {:.2}s",
            sphere::format_complex(r.constant),
            r.relative_spread,
            sphere::format_complex(q.constant),
            q.relative_spread,
            cli.code,
            elapsed.as_secs_f64()
        ),
    )
}

fn parse_poly(field: &str) -> Vec<Complex64> {
    sphere::parse_coefficients(field).unwrap()
}

fn rabbit_recovery() -> Outcome {
    let cli = run(
        &["gf", "fixed-points", preset("rabbit.toml").to_str().unwrap(), "--seeds", "200", "--rng-seed", "0"],
        None,
    );
    let oracle = rabbit_parameters();
    let mut found = Vec::new();
    let mut all_ok = cli.code == 0;
    for line in cli.stdout.lines().filter(|l| l.starts_with("fixed[") && l.contains("on_delta=false")) {
        let field = |key: &str| {
            line.split_whitespace()
                .find_map(|t| t.strip_prefix(key))
                .map(str::to_string)
        };
        let Some(poly) = field("poly=") else {
            all_ok = false;
            continue;
        };
        let coeffs = parse_poly(&poly);
        let shape_ok = coeffs.len() == 3 && coeffs[1].norm() < 1e-10 && (coeffs[2] - 1.0).norm() < 1e-10;
        let c = coeffs[0];
        let err = oracle.iter().map(|o| (o - c).norm()).fold(f64::INFINITY, f64::min);
        let dev: f64 = field("max_deviation=").and_then(|s| s.parse().ok()).unwrap_or(f64::INFINITY);
        let certified = field("certified=").as_deref() == Some("true");
        all_ok &= shape_ok && err < 1e-10 && certified && dev < 1e-9;
        found.push(format!("c={} err={err:.1e} dev={dev:.1e}", sphere::format_complex(c)));
    }
    let mut classes: Vec<Point> = Vec::new();
    for line in cli.stdout.lines().filter(|l| l.contains("on_delta=false")) {
        if let Some(p) = line.split_whitespace().find_map(|t| t.strip_prefix("poly=")) {
            sphere::insert_unique(&mut classes, Point::Finite(parse_poly(p)[0]), 1e-8);
        }
    }
    let distinct = classes.len();
    let ok = all_ok && found.len() == 3 && distinct == 3 && cli.elapsed < Duration::from_secs(10);
    outcome(
        ok,
        format!("{} off-diagonal classes [{}]; {:.2}s", found.len(), found.join(", "), cli.elapsed.as_secs_f64()),
    )
}

fn delta_invariance() -> Outcome {
    let portraits = [
        ("rabbit", examples::rabbit()),
        ("period-4", examples::quadratic_period(4)),
        ("period-5", examples::quadratic_period(5)),
        ("cubic-fixed", examples::cubic_fixed_critical()),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, p) in portraits {
        let gf = GfMap::build(&p).unwrap();
        let chk = moduli::delta_invariance_check(&gf, 1000, 0, 1e-10);
        ok &= chk.failures == 0 && chk.samples == 1000;
        parts.push(format!("{name} {}/{} max_gap={:.1e}", chk.samples - chk.failures, chk.samples, chk.max_gap));
    }
    outcome(ok, parts.join("; "))
}

fn cubic_family() -> Outcome {
    let fam = cubic::verify_family(1000, 0, 1e-9).unwrap();
    let p1_ok = fam.samples == 1000 && fam.p1_failures == 0 && fam.p1_max_residual < 1e-9;
    let diagram_ok = fam.diagram_failures == 0
        && fam.diagram_max_residual < 1e-9
        && fam.recovery_max_residual < 1e-9;
    let theta = cubic::theta_preimages(1e-10).unwrap();
    let sets_ok = theta.x_set_matches() && theta.y_set_matches();
    let y_mult = theta.y_multiplicities();
    let mult_ok = y_mult.iter().all(|&m| m == 2);
    let fit = cubic::local_degree_at_basepoint(1e-3).unwrap();
    let fit_ok = (fit.exponent - 2.0).abs() < 1e-3 && (fit.coefficient - 0.25).abs() < 1e-3;
    let mark = |b: bool| if b { "ok" } else { "FAIL" };
    outcome(
        p1_ok && diagram_ok && sets_ok && mult_ok && fit_ok,
        format!(
            "P1 {} (max {:.1e}); diagram {} (max {:.1e}); Theta' sets {} (X {:.1e}, Y {:.1e}); \
             Y-multiplicity 2 at each point {} (observed {:?}); local degree {} (exponent {:.6}, coefficient {:.6})",
            mark(p1_ok),
            fam.p1_max_residual,
            mark(diagram_ok),
            fam.diagram_max_residual.max(fam.recovery_max_residual),
            mark(sets_ok),
            theta.x_deviation,
            theta.y_deviation,
            mark(mult_ok),
            y_mult,
            mark(fit_ok),
            fit.exponent,
            fit.coefficient
        ),
    )
}

fn decomposition_certificates() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();

    let quartic = run(&["constsigma", "check", "--example", "quartic"], None);
    let rep = constsigma::check_conditions(&constsigma::example_quartic(), 1e-10).unwrap();
    let pf_expected = [Point::real(0.0), Point::real(1.0), Point::real(-1.0), Point::Infinity];
    let pf_ok = rep
        .postcritical
        .set()
        .is_some_and(|pf| sphere::set_eq(pf, &pf_expected, 1e-10));
    let q_ok = quartic.code == 0 && quartic.stdout.contains("\nsigma_f: constant (|A|=3)\n") && pf_ok;
    ok &= q_ok;
    notes.push(format!("quartic {}", if q_ok { "constant, P_f={0,1,-1,inf}" } else { "FAIL" }));

    let mut family = Vec::new();
    for n in 2..=8 {
        let r = run(&["constsigma", "check", "--example", &format!("family:{n}")], None);
        let card = summary_value(&r.stdout, "card_P_f").and_then(|v| v.parse::<usize>().ok());
        let good = r.code == 0 && card == Some(n + 2);
        ok &= good;
        family.push(format!("{n}:{}", card.map_or("?".into(), |c| c.to_string())));
    }
    notes.push(format!("family |P_f| {}", family.join(",")));

    let mut skinny = Vec::new();
    for (n, k) in [(4, 2), (6, 2), (6, 3), (8, 4)] {
        let r = run(&["constsigma", "check", "--example", &format!("skinny:{n},{k}")], None);
        let codim = summary_value(&r.stdout, "codimension").and_then(|v| v.parse::<usize>().ok());
        let m = n / k;
        let good = r.code == 0 && r.stdout.contains("check P_f = A_n: PASS") && codim == Some((k - 1) * m);
        ok &= good;
        skinny.push(format!("({n},{k}) codim {}", codim.map_or("?".into(), |c| c.to_string())));
    }
    notes.push(format!("skinny {}", skinny.join(", ")));
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(5);
    notes.push(format!("{:.2}s", elapsed.as_secs_f64()));
    outcome(ok, notes.join("; "))
}

fn inverse_branch_contraction() -> Outcome {
    let gf = GfMap::build(&examples::rabbit()).unwrap();
    let c = rabbit_parameters()[1];
    let fixed = ModuliVector::new(vec![c, c * c + c]);
    let rate = inverse_branch_rate(&gf, &fixed).unwrap();
    let base = fixed.normalized();
    let j = (0..base.len()).find(|&i| base[i] != Complex64::new(1.0, 0.0)).unwrap();
    let mut start = base.clone();
    start.0[j] += Complex64::from_polar(0.05, 0.7);
    let d0 = chart_distance(&fixed, &start);
    let orbit = match pullback_orbit(&gf, &start, 12, 1e-14, std::slice::from_ref(&fixed)) {
        Ok(o) => o,
        Err(e) => return outcome(false, format!("pullback orbit failed: {e}")),
    };
    let d = &orbit.distances;
    let steps = d.len() - 1;
    let decreasing = d.windows(2).all(|w| w[1] < w[0]);
    let worst = d
        .windows(2)
        .map(|w| (w[1] / w[0] / rate - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(
        (d0 - 0.05).abs() < 1e-12 && !orbit.stalled && steps >= 10 && decreasing && worst < 0.1,
        format!(
            "start distance {d0:.3}; {steps} steps; branch rate {rate:.6}; worst ratio deviation {:.2}%; final distance {:.2e}",
            100.0 * worst,
            d[steps]
        ),
    )
}

fn figure_reproduction() -> Outcome {
    let dir = std::env::temp_dir().join(format!("pullback-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for name in ["fig1", "fig3", "fig4"] {
        let a = dir.join(format!("{name}-a.ppm"));
        let b = dir.join(format!("{name}-b.ppm"));
        let map = format!("preset:{name}");
        let common = ["render", "julia", "--map", &map, "--size", "512x512", "--max-iter", "500", "--out"];
        let first = run(&[&common[..], &[a.to_str().unwrap()]].concat(), Some("0"));
        let second = run(&[&common[..], &[b.to_str().unwrap()]].concat(), Some("1"));
        let unresolved: f64 = summary_value(&first.stdout, "unresolved_fraction")
            .and_then(|v| v.parse().ok())
            .unwrap_or(1.0);
        let cycles_ok = first.stdout.contains("check attracting cycles match the preset: PASS");
        let identical = std::fs::read(&a).ok().is_some_and(|x| Some(x) == std::fs::read(&b).ok());
        let good = first.code == 0
            && second.code == 0
            && first.elapsed < Duration::from_secs(30)
            && unresolved < 0.005
            && cycles_ok
            && identical;
        ok &= good;
        notes.push(format!(
            "{name} {} unresolved={unresolved:.4} sets={} identical={identical} {:.2}s",
            if good { "ok" } else { "FAIL" },
            summary_value(&first.stdout, "attracting_sets").unwrap_or("?"),
            first.elapsed.as_secs_f64()
        ));
    }
    let _ = std::fs::remove_dir_all(&dir);
    outcome(ok, notes.join("; "))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("jacobian identity", jacobian_identity),
        ("rabbit recovery", rabbit_recovery),
        ("diagonal invariance", delta_invariance),
        ("cubic family", cubic_family),
        ("decomposition certificates", decomposition_certificates),
        ("inverse-branch contraction", inverse_branch_contraction),
        ("figure reproduction", figure_reproduction),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {} {name}: {} | {}",
            k + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
