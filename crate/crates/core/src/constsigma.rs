//! Certificates for decompositions `f = g ∘ s` with a finite set `A ⊂ ℙ¹`
//! satisfying
//!
//! ```text
//! V_s ⊆ A,   V_g ∪ g(A) ⊆ s⁻¹(A).
//! ```
//!
//! Under these hypotheses the image of the pullback map of `f` has dimension
//! at most `|A| − 3`, and it is constant when `|A| = 3`. The checker
//! verifies the inclusions numerically and reports the sets involved,
//! including the sandwich `V_g ∪ g(V_s) ⊆ P_f ⊆ B` with `B = V_g ∪ g(A)`.
//!
//! Dimension figures for the skinny family are quoted from the known
//! formula, not recomputed.

use num_complex::Complex64;
use serde::Deserialize;

use crate::dynamics::{forward_closure, Closure};
use crate::poly::ComplexPoly;
use crate::rational::{MapSpec, RationalMap};
use crate::sphere::{self, canonical_set, contains, Point};
use crate::{Error, Result};

/// Chordal tolerance for set membership.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Tolerance for the two computations of `V_f` to agree.
pub const CRITICAL_VALUE_TOL: f64 = 1e-9;
pub const ROOT_TOL: f64 = 1e-10;
pub const POSTCRITICAL_MAX_STEPS: usize = 256;

#[derive(Clone, Debug)]
pub struct DecompositionInstance {
    pub name: String,
    pub s: RationalMap,
    pub g: RationalMap,
    pub a: Vec<Point>,
}

impl DecompositionInstance {
    pub fn new(name: impl Into<String>, s: RationalMap, g: RationalMap, a: Vec<Point>) -> Result<Self> {
        if s.degree() < 2 && g.degree() < 2 {
            return Err(Error::DegenerateInput("need deg s ≥ 2 or deg g ≥ 2".into()));
        }
        if s.degree() == 0 || g.degree() == 0 {
            return Err(Error::DegenerateInput("s and g must be nonconstant".into()));
        }
        let a = canonical_set(&a, MEMBERSHIP_TOL);
        if a.len() < 3 {
            return Err(Error::DegenerateInput(format!("|A| = {} < 3", a.len())));
        }
        Ok(Self {
            name: name.into(),
            s,
            g,
            a,
        })
    }

    pub fn composite(&self) -> RationalMap {
        self.g.compose(&self.s)
    }

    /// Reads an instance from TOML:
    ///
    /// ```toml
    /// [s]
    /// numerator = "0 0 1"
    /// [g]
    /// numerator = "-1 2,-2 0,2"
    /// denominator = "1"
    /// a = ["0", "1", "inf"]
    /// ```
    ///
    /// Coefficients are ascending; `denominator` defaults to `1`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: MapsFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let a = file
            .a
            .iter()
            .map(|p| sphere::parse_point(p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            file.name.unwrap_or_else(|| "custom".into()),
            file.s.to_map()?,
            file.g.to_map()?,
            a,
        )
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapsFile {
    name: Option<String>,
    s: MapSpec,
    g: MapSpec,
    a: Vec<String>,
}

fn zn(n: usize) -> RationalMap {
    RationalMap::polynomial(ComplexPoly::monomial(Complex64::new(1.0, 0.0), n))
}

/// `g_n(z) = ((n+1)z − z^{n+1})/n`.
pub fn g_family(n: usize) -> RationalMap {
    let nf = n as f64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 2];
    coeffs[1] = Complex64::new((nf + 1.0) / nf, 0.0);
    coeffs[n + 1] = Complex64::new(-1.0 / nf, 0.0);
    RationalMap::polynomial(ComplexPoly::new(coeffs))
}

/// `A_m = {0, ∞} ∪ {m-th roots of unity}`.
pub fn a_set(m: usize) -> Vec<Point> {
    let mut out = vec![Point::real(0.0), Point::Infinity];
    out.extend(sphere::roots_of_unity(m).into_iter().map(Point::Finite));
    out
}

/// `s = z²`, `g = 2i(z − (1+i)/2)²`, `A = {0, 1, ∞}`.
pub fn example_quartic() -> DecompositionInstance {
    let i = Complex64::new(0.0, 1.0);
    let c = Complex64::new(0.5, 0.5);
    // 2i(z − c)² = 2i c² − 4i c z + 2i z²
    let g = RationalMap::polynomial(ComplexPoly::new(vec![2.0 * i * c * c, -4.0 * i * c, 2.0 * i]));
    DecompositionInstance::new("quartic", zn(2), g, vec![Point::real(0.0), Point::real(1.0), Point::Infinity])
        .expect("valid instance")
}

/// `s = zⁿ`, `g = g_n`, `A = {0, 1, ∞}`.
pub fn example_family(n: usize) -> Result<DecompositionInstance> {
    if n < 2 {
        return Err(Error::DegenerateInput(format!("family needs n ≥ 2, got {n}")));
    }
    DecompositionInstance::new(
        format!("family:{n}"),
        zn(n),
        g_family(n),
        vec![Point::real(0.0), Point::real(1.0), Point::Infinity],
    )
}

#[derive(Clone, Debug)]
pub struct SkinnyDimensions {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub teichmuller_dim: usize,
    pub image_dim: usize,
    pub codimension: usize,
}

/// `s = z^k`, `g = g_n`, `A = A_m` with `n = km`.
pub fn skinny_family(n: usize, k: usize) -> Result<(DecompositionInstance, SkinnyDimensions)> {
    if n < 2 || k == 0 || !n.is_multiple_of(k) {
        return Err(Error::DegenerateInput(format!(
            "skinny family needs n ≥ 2 and k | n, got n = {n}, k = {k}"
        )));
    }
    let m = n / k;
    let inst = DecompositionInstance::new(format!("skinny:{n},{k}"), zn(k), g_family(n), a_set(m))?;
    let dims = SkinnyDimensions {
        n,
        k,
        m,
        teichmuller_dim: n - 1,
        image_dim: m - 1,
        codimension: (k - 1) * m,
    };
    Ok((inst, dims))
}

#[derive(Clone, Debug)]
pub enum Postcritical {
    Closed(Vec<Point>),
    NotClosed { points: Vec<Point>, reason: String },
}

impl Postcritical {
    pub fn set(&self) -> Option<&[Point]> {
        match self {
            Postcritical::Closed(p) => Some(p),
            Postcritical::NotClosed { .. } => None,
        }
    }
}

/// `P_f`: forward orbits of the critical values, merged at chordal
/// distance `tol`.
pub fn compute_postcritical(map: &RationalMap, tol: f64, max_steps: usize) -> Result<Postcritical> {
    let values = map.critical_values(ROOT_TOL, tol)?;
    Ok(match forward_closure(map, &values, tol, max_steps) {
        Closure::Closed(graph) => Postcritical::Closed(canonical_set(&graph.points, tol)),
        Closure::NotClosed { points, reason } => Postcritical::NotClosed {
            points: canonical_set(&points, tol),
            reason,
        },
    })
}

#[derive(Clone, Debug)]
pub struct InclusionCheck {
    pub name: &'static str,
    /// Largest chordal distance from a point of the left side to the right side.
    pub max_deviation: f64,
    pub offending: Option<Point>,
    pub passed: bool,
}

fn inclusion(name: &'static str, left: &[Point], right: &[Point], tol: f64) -> InclusionCheck {
    let mut worst = (0.0, None);
    for p in left {
        let d = right.iter().map(|q| p.chordal(q)).fold(f64::INFINITY, f64::min);
        if d > worst.0 {
            worst = (d, Some(*p));
        }
    }
    let passed = worst.0 < tol;
    InclusionCheck {
        name,
        max_deviation: worst.0,
        offending: if passed { None } else { worst.1 },
        passed,
    }
}

fn set_distance(a: &[Point], b: &[Point]) -> f64 {
    if a.is_empty() && b.is_empty() {
        0.0
    } else {
        sphere::hausdorff(a, b)
    }
}

#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub name: String,
    pub tol: f64,
    pub a: Vec<Point>,
    pub v_s: Vec<Point>,
    pub v_g: Vec<Point>,
    pub g_of_a: Vec<Point>,
    pub s_inv_a: Vec<Point>,
    pub inclusions: Vec<InclusionCheck>,
    pub b: Vec<Point>,
    pub postcritical: Postcritical,
    pub sandwich: Vec<InclusionCheck>,
    pub v_f_direct: Vec<Point>,
    pub v_f_decomposed: Vec<Point>,
    pub v_f_deviation: f64,
    /// `V_f ∪ f(s⁻¹(A))`, which must equal `B`.
    pub b_recomposed: Vec<Point>,
    pub b_deviation: f64,
    pub dimension_bound: usize,
}

impl CertificateReport {
    pub fn hypotheses_hold(&self) -> bool {
        self.inclusions.iter().all(|c| c.passed)
    }

    pub fn certified(&self) -> bool {
        self.hypotheses_hold()
            && self.postcritical.set().is_some()
            && self.sandwich.iter().all(|c| c.passed)
            && self.v_f_deviation < CRITICAL_VALUE_TOL
            && self.b_deviation < CRITICAL_VALUE_TOL
    }

    pub fn is_constant(&self) -> bool {
        self.a.len() == 3
    }

    pub fn verdict(&self) -> String {
        if !self.hypotheses_hold() {
            "sigma_f: hypotheses fail".to_string()
        } else if self.is_constant() {
            "sigma_f: constant (|A|=3)".to_string()
        } else {
            format!("sigma_f: image dimension <= {}", self.dimension_bound)
        }
    }
}

fn images(map: &RationalMap, points: &[Point], tol: f64) -> Vec<Point> {
    let out: Vec<Point> = points.iter().map(|p| map.eval(*p)).collect();
    canonical_set(&out, tol)
}

fn union(a: &[Point], b: &[Point], tol: f64) -> Vec<Point> {
    let all: Vec<Point> = a.iter().chain(b).copied().collect();
    canonical_set(&all, tol)
}

pub fn check_conditions(inst: &DecompositionInstance, tol: f64) -> Result<CertificateReport> {
    let merge = MEMBERSHIP_TOL;
    let v_s = canonical_set(&inst.s.critical_values(ROOT_TOL, merge)?, merge);
    let v_g = canonical_set(&inst.g.critical_values(ROOT_TOL, merge)?, merge);
    let g_of_a = images(&inst.g, &inst.a, merge);
    let mut s_inv_a = Vec::new();
    for p in &inst.a {
        for (q, _) in inst.s.preimages(*p, ROOT_TOL)? {
            s_inv_a.push(q);
        }
    }
    let s_inv_a = canonical_set(&s_inv_a, merge);
    let b = union(&v_g, &g_of_a, merge);

    let inclusions = vec![
        inclusion("V_s in A", &v_s, &inst.a, tol),
        inclusion("V_g in s^-1(A)", &v_g, &s_inv_a, tol),
        inclusion("g(A) in s^-1(A)", &g_of_a, &s_inv_a, tol),
    ];

    let f = inst.composite();
    let postcritical = compute_postcritical(&f, merge, POSTCRITICAL_MAX_STEPS)?;
    let lower = union(&v_g, &images(&inst.g, &v_s, merge), merge);
    let sandwich = match postcritical.set() {
        Some(pf) => vec![
            inclusion("V_g u g(V_s) in P_f", &lower, pf, tol),
            inclusion("P_f in B", pf, &b, tol),
        ],
        None => Vec::new(),
    };

    let v_f_direct = canonical_set(&f.critical_values(ROOT_TOL, merge)?, merge);
    let v_f_deviation = set_distance(&v_f_direct, &lower);
    let b_recomposed = union(&v_f_direct, &images(&f, &s_inv_a, merge), merge);
    let b_deviation = set_distance(&b_recomposed, &b);

    Ok(CertificateReport {
        name: inst.name.clone(),
        tol,
        a: inst.a.clone(),
        v_s,
        v_g,
        g_of_a,
        s_inv_a,
        inclusions,
        b,
        postcritical,
        sandwich,
        v_f_deviation,
        v_f_decomposed: lower,
        v_f_direct,
        b_recomposed,
        b_deviation,
        dimension_bound: inst.a.len() - 3,
    })
}

/// Whether `set` equals `A_n` up to `tol`.
pub fn equals_a_set(set: &[Point], n: usize, tol: f64) -> bool {
    let target = a_set(n);
    set.len() == target.len() && target.iter().all(|p| contains(set, p, tol))
}
