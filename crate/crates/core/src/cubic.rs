//! The one-parameter family of cubic rational maps
//!
//! ```text
//! F_α(z) = (a z³ + 3b z² + 2a) / (2b z³ + 3a z + b),   α = [a : b] ∈ ℙ¹,
//! ```
//!
//! which contains `f = F_0 = 3z²/(2z³+1)` and `F_∞ = (z³+2)/(3z)`. Every
//! member has critical points `1, ω, ω̄` with `F(1) = 1` and `ω ↔ ω̄`; the
//! fourth critical point is `x = α²` with critical value `y = Y(α)`.
//! The correspondence `y ↦ x` on moduli coordinates is the shadow of the
//! pullback map of `f`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::poly::ComplexPoly;
use crate::rational::RationalMap;
use crate::sphere::{self, hausdorff, Point};
use crate::{Error, Result};

/// Samples closer than this to a degenerate parameter are skipped.
pub const DEGENERACY_ZONE: f64 = 1e-3;

const ROOT_TOL: f64 = 1e-10;

/// `ω = exp(2πi/3)`.
pub fn omega() -> Complex64 {
    sphere::unit_root(3)
}

/// `Θ = {1, ω, ω̄}`.
pub fn theta() -> Vec<Complex64> {
    let w = omega();
    vec![Complex64::new(1.0, 0.0), w, w.conj()]
}

/// `Θ′ = {±1, ±ω, ±ω̄}`.
pub fn theta_prime() -> Vec<Complex64> {
    theta().into_iter().flat_map(|t| [t, -t]).collect()
}

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `F_α` for `α ∈ ℂ ∪ {∞}`.
pub fn family_map(alpha: Point) -> RationalMap {
    let (a, b) = match alpha {
        Point::Finite(z) => (z, cx(1.0)),
        Point::Infinity => (cx(1.0), cx(0.0)),
    };
    let zero = cx(0.0);
    let num = ComplexPoly::new(vec![a * 2.0, zero, b * 3.0, a]);
    let den = ComplexPoly::new(vec![b, a * 3.0, zero, b * 2.0]);
    RationalMap::new(num, den).expect("denominator of F_alpha is nonzero")
}

pub fn f_alpha(alpha: Point, z: Point) -> Point {
    family_map(alpha).eval(z)
}

/// `X(α) = α²`.
pub fn x_map(alpha: Point) -> Point {
    match alpha {
        Point::Finite(a) => Point::Finite(a * a),
        Point::Infinity => Point::Infinity,
    }
}

/// `Y(α) = α(α³+2)/(2α³+1)`.
pub fn y_map(alpha: Point) -> Point {
    y_rational().eval(alpha)
}

/// `Y` as a degree-4 rational map.
pub fn y_rational() -> RationalMap {
    RationalMap::new(
        ComplexPoly::from_real(&[0.0, 2.0, 0.0, 0.0, 1.0]),
        ComplexPoly::from_real(&[1.0, 0.0, 0.0, 2.0]),
    )
    .expect("nonzero denominator")
}

/// `A(x, y) = (x² − y)/(2xy − 2)`, which recovers `α` from the critical
/// point `x` and critical value `y` of `F_α`.
pub fn a_from_xy(x: Complex64, y: Complex64) -> Result<Complex64> {
    let den = 2.0 * x * y - 2.0;
    if den.norm() <= 1e-14 * (2.0 * x * y).norm().max(1.0) {
        return Err(Error::DegenerateInput(format!(
            "x·y = 1 (x = {}, y = {})",
            sphere::format_complex(x),
            sphere::format_complex(y)
        )));
    }
    Ok((x * x - y) / den)
}

/// Parameters where the family or the diagram degenerates: `α⁶ = 1`
/// (`α² ∈ Θ`, equivalently `xy = 1`) and the poles of `Y` (`2α³ + 1 = 0`).
pub fn degenerate_parameters() -> Vec<Complex64> {
    let mut out = sphere::roots_of_unity(6);
    let r = 0.5f64.cbrt();
    out.extend(
        sphere::roots_of_unity(3)
            .into_iter()
            .map(|w| -w * r),
    );
    out
}

pub fn is_degenerate(alpha: Complex64, zone: f64) -> bool {
    degenerate_parameters()
        .iter()
        .any(|d| (d - alpha).norm() < zone)
}

#[derive(Clone, Debug)]
pub struct P1Report {
    pub alpha: Point,
    pub excluded: bool,
    pub critical_points: Vec<(Point, usize)>,
    pub critical_set_deviation: f64,
    pub all_simple: bool,
    pub value_deviation: f64,
    pub passed: bool,
}

/// Checks that `F_α` has critical set `{1, ω, ω̄, α²}` (all simple),
/// `F(1) = 1`, `F(ω) = ω̄` and `F(ω̄) = ω`.
pub fn verify_p1(alpha: Point, tol: f64) -> Result<P1Report> {
    let excluded = match alpha {
        Point::Finite(a) => sphere::roots_of_unity(6)
            .iter()
            .any(|d| (d - a).norm() < DEGENERACY_ZONE),
        Point::Infinity => false,
    };
    if excluded {
        return Ok(P1Report {
            alpha,
            excluded,
            critical_points: Vec::new(),
            critical_set_deviation: f64::NAN,
            all_simple: false,
            value_deviation: f64::NAN,
            passed: false,
        });
    }
    let f = family_map(alpha);
    let critical_points = f.critical_points(ROOT_TOL)?;
    let mut expected: Vec<Point> = theta().into_iter().map(Point::Finite).collect();
    expected.push(x_map(alpha));
    let found: Vec<Point> = critical_points.iter().map(|(p, _)| *p).collect();
    let critical_set_deviation = hausdorff(&found, &expected);
    let all_simple = critical_points.len() == 4 && critical_points.iter().all(|(_, m)| *m == 1);

    let w = omega();
    let value_deviation = [
        (cx(1.0), cx(1.0)),
        (w, w.conj()),
        (w.conj(), w),
    ]
    .iter()
    .map(|&(z, v)| f.eval_complex(z).chordal(&Point::Finite(v)))
    .fold(0.0, f64::max);

    let passed = all_simple && critical_set_deviation < tol && value_deviation < tol;
    Ok(P1Report {
        alpha,
        excluded,
        critical_points,
        critical_set_deviation,
        all_simple,
        value_deviation,
        passed,
    })
}

#[derive(Clone, Debug)]
pub struct DiagramReport {
    pub alpha: Complex64,
    pub excluded: bool,
    /// `d(F_α(α²), Y(α))`, chordal.
    pub critical_value_residual: f64,
    /// `|A(α², Y(α)) − α|`.
    pub recovery_residual: f64,
    pub passed: bool,
}

/// Checks `F_α(α²) = Y(α)` and `A(α², Y(α)) = α`.
pub fn verify_diagram(alpha: Complex64, tol: f64) -> Result<DiagramReport> {
    if is_degenerate(alpha, DEGENERACY_ZONE) {
        return Ok(DiagramReport {
            alpha,
            excluded: true,
            critical_value_residual: f64::NAN,
            recovery_residual: f64::NAN,
            passed: false,
        });
    }
    let x = alpha * alpha;
    let y = y_map(Point::Finite(alpha));
    let critical_value_residual = f_alpha(Point::Finite(alpha), Point::Finite(x)).chordal(&y);
    let y = y
        .finite()
        .ok_or_else(|| Error::DegenerateInput("Y(α) = ∞".into()))?;
    let recovery_residual = (a_from_xy(x, y)? - alpha).norm();
    Ok(DiagramReport {
        alpha,
        excluded: false,
        critical_value_residual,
        recovery_residual,
        passed: critical_value_residual < tol && recovery_residual < tol,
    })
}

#[derive(Clone, Debug)]
pub struct InfinityChartReport {
    pub critical_points: Vec<(Point, usize)>,
    pub critical_set_deviation: f64,
    /// `d(F_∞(∞), Y(∞))`.
    pub value_residual: f64,
    pub passed: bool,
}

/// At `α = ∞` the moving critical point is `∞` itself, with critical value
/// `F_∞(∞) = ∞ = Y(∞)`.
pub fn verify_infinity_chart(tol: f64) -> Result<InfinityChartReport> {
    let f = family_map(Point::Infinity);
    let critical_points = f.critical_points(ROOT_TOL)?;
    let mut expected: Vec<Point> = theta().into_iter().map(Point::Finite).collect();
    expected.push(Point::Infinity);
    let found: Vec<Point> = critical_points.iter().map(|(p, _)| *p).collect();
    let critical_set_deviation = hausdorff(&found, &expected);
    let value_residual = f.eval(Point::Infinity).chordal(&y_map(Point::Infinity));
    Ok(InfinityChartReport {
        passed: critical_set_deviation < tol && value_residual < tol,
        critical_points,
        critical_set_deviation,
        value_residual,
    })
}

/// `count` parameters uniform in the disk of radius 2, skipping the
/// degeneracy zone. Returns the samples and the number skipped.
pub fn sample_alphas(count: usize, rng_seed: u64) -> (Vec<Complex64>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = Vec::with_capacity(count);
    let mut skipped = 0;
    while out.len() < count {
        let r = 2.0 * rng.gen::<f64>().sqrt();
        let t = std::f64::consts::TAU * rng.gen::<f64>();
        let a = Complex64::from_polar(r, t);
        if is_degenerate(a, DEGENERACY_ZONE) {
            skipped += 1;
        } else {
            out.push(a);
        }
    }
    (out, skipped)
}

#[derive(Clone, Debug)]
pub struct ThetaReport {
    /// `X⁻¹(Θ)` with multiplicities.
    pub x_preimages: Vec<(Complex64, usize)>,
    /// `Y⁻¹(Θ)` with multiplicities.
    pub y_preimages: Vec<(Complex64, usize)>,
    pub x_deviation: f64,
    pub y_deviation: f64,
    /// Critical values of `Y`, which should be exactly `Θ`.
    pub y_critical_values: Vec<Point>,
    pub y_critical_value_deviation: f64,
    pub tol: f64,
}

impl ThetaReport {
    pub fn x_set_matches(&self) -> bool {
        self.x_deviation < self.tol
    }

    pub fn y_set_matches(&self) -> bool {
        self.y_deviation < self.tol
    }

    /// Multiplicity of `Y` at each point of `Θ′`, in `Θ′` order.
    pub fn y_multiplicities(&self) -> Vec<usize> {
        multiplicities_on(&self.y_preimages, self.tol)
    }

    pub fn x_multiplicities(&self) -> Vec<usize> {
        multiplicities_on(&self.x_preimages, self.tol)
    }
}

fn multiplicities_on(pre: &[(Complex64, usize)], tol: f64) -> Vec<usize> {
    theta_prime()
        .iter()
        .map(|t| {
            pre.iter()
                .filter(|(z, _)| (z - t).norm() < tol)
                .map(|(_, m)| m)
                .sum()
        })
        .collect()
}

fn merge_with_multiplicity(into: &mut Vec<(Complex64, usize)>, z: Complex64, m: usize, tol: f64) {
    match into.iter_mut().find(|(w, _)| (w - z).norm() < tol) {
        Some(entry) => entry.1 += m,
        None => into.push((z, m)),
    }
}

/// Solves `X(α) ∈ Θ` and `Y(α) ∈ Θ` and compares both solution sets with
/// `Θ′`.
pub fn theta_preimages(tol: f64) -> Result<ThetaReport> {
    let target: Vec<Point> = theta_prime().into_iter().map(Point::Finite).collect();
    let mut x_pre = Vec::new();
    let mut y_pre = Vec::new();
    for t in theta() {
        let xq = ComplexPoly::new(vec![-t, cx(0.0), cx(1.0)]);
        for (z, m) in xq.roots_with_multiplicity(ROOT_TOL)? {
            merge_with_multiplicity(&mut x_pre, z, m, tol.max(1e-8));
        }
        // α⁴ + 2α − θ(2α³ + 1)
        let yq = ComplexPoly::new(vec![-t, cx(2.0), cx(0.0), -2.0 * t, cx(1.0)]);
        for (z, m) in yq.roots_with_multiplicity(ROOT_TOL)? {
            merge_with_multiplicity(&mut y_pre, z, m, tol.max(1e-8));
        }
    }
    let as_points = |v: &[(Complex64, usize)]| v.iter().map(|(z, _)| Point::Finite(*z)).collect::<Vec<_>>();
    let x_deviation = hausdorff(&as_points(&x_pre), &target);
    let y_deviation = hausdorff(&as_points(&y_pre), &target);

    let y_critical_values = sphere::canonical_set(&y_rational().critical_values(ROOT_TOL, 1e-8)?, 1e-8);
    let theta_pts: Vec<Point> = theta().into_iter().map(Point::Finite).collect();
    let y_critical_value_deviation = hausdorff(&y_critical_values, &theta_pts);

    x_pre.sort_by(|a, b| sphere::lex_cmp(&a.0, &b.0));
    y_pre.sort_by(|a, b| sphere::lex_cmp(&a.0, &b.0));
    Ok(ThetaReport {
        x_preimages: x_pre,
        y_preimages: y_pre,
        x_deviation,
        y_deviation,
        y_critical_values,
        y_critical_value_deviation,
        tol,
    })
}

/// The root of `Y(α) = y` continuous with `α = 0` as `y → 0`.
pub fn basepoint_branch(y: Complex64) -> Result<Complex64> {
    // α⁴ − 2yα³ + 2α − y = 0
    let q = ComplexPoly::new(vec![-y, cx(2.0), cx(0.0), -2.0 * y, cx(1.0)]);
    let guess = y / 2.0;
    q.roots(ROOT_TOL)?
        .into_iter()
        .min_by(|a, b| (a - guess).norm().total_cmp(&(b - guess).norm()))
        .ok_or_else(|| Error::DegenerateInput("no roots".into()))
}

#[derive(Clone, Debug)]
pub struct LocalDegreeFit {
    pub exponent: f64,
    /// `exp(intercept)` of the log–log fit, i.e. `|x| ≈ coefficient · |y|^exponent`.
    pub coefficient: f64,
    /// Mean of `x / y²` over the samples.
    pub complex_coefficient: Complex64,
    pub fit_residual: f64,
    pub samples: usize,
    pub passed: bool,
}

const FIT_RADII: usize = 5;
const FIT_ANGLES: usize = 16;

/// Fits `log|x|` against `log|y|` for the basepoint branch of `y ↦ x` on
/// circles of radius `sample_radius · 2^{-k}`, `k = 0..5`.
pub fn local_degree_at_basepoint(sample_radius: f64) -> Result<LocalDegreeFit> {
    let mut pts = Vec::new();
    let mut ratio_sum = Complex64::new(0.0, 0.0);
    for k in 0..FIT_RADII {
        let r = sample_radius * 0.5f64.powi(k as i32);
        for j in 0..FIT_ANGLES {
            let y = Complex64::from_polar(r, std::f64::consts::TAU * (j as f64 + 0.5) / FIT_ANGLES as f64);
            let alpha = basepoint_branch(y)?;
            let x = alpha * alpha;
            ratio_sum += x / (y * y);
            pts.push((y.norm().ln(), x.norm().ln()));
        }
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let fit_residual = pts
        .iter()
        .map(|p| (p.1 - (exponent * p.0 + intercept)).abs())
        .fold(0.0, f64::max);
    Ok(LocalDegreeFit {
        exponent,
        coefficient: intercept.exp(),
        complex_coefficient: ratio_sum / n,
        fit_residual,
        samples: pts.len(),
        passed: fit_residual < 1e-3,
    })
}

#[derive(Clone, Debug)]
pub struct FamilyReport {
    pub samples: usize,
    pub skipped: usize,
    pub p1_failures: usize,
    pub p1_max_residual: f64,
    pub diagram_failures: usize,
    pub diagram_max_residual: f64,
    pub recovery_max_residual: f64,
    pub basepoint: P1Report,
    pub infinity: InfinityChartReport,
}

/// Runs [`verify_p1`] and [`verify_diagram`] on sampled parameters.
pub fn verify_family(samples: usize, rng_seed: u64, tol: f64) -> Result<FamilyReport> {
    let (alphas, skipped) = sample_alphas(samples, rng_seed);
    let mut p1_failures = 0;
    let mut p1_max: f64 = 0.0;
    let mut d_failures = 0;
    let mut d_max: f64 = 0.0;
    let mut rec_max: f64 = 0.0;
    for &a in &alphas {
        let p1 = verify_p1(Point::Finite(a), tol)?;
        if !p1.passed {
            p1_failures += 1;
        }
        p1_max = p1_max.max(p1.critical_set_deviation).max(p1.value_deviation);
        let d = verify_diagram(a, tol)?;
        if !d.passed {
            d_failures += 1;
        }
        d_max = d_max.max(d.critical_value_residual);
        rec_max = rec_max.max(d.recovery_residual);
    }
    Ok(FamilyReport {
        samples: alphas.len(),
        skipped,
        p1_failures,
        p1_max_residual: p1_max,
        diagram_failures: d_failures,
        diagram_max_residual: d_max,
        recovery_max_residual: rec_max,
        basepoint: verify_p1(Point::real(0.0), tol)?,
        infinity: verify_infinity_chart(tol)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basepoint_member_is_f() {
        let w = omega();
        assert_eq!(f_alpha(Point::real(0.0), Point::real(1.0)), Point::real(1.0));
        let v = f_alpha(Point::real(0.0), Point::Finite(w));
        assert!(v.chordal(&Point::Finite(w.conj())) < 1e-14);
        let f0 = family_map(Point::real(0.0));
        assert_eq!(f0.numerator(), &ComplexPoly::from_real(&[0.0, 0.0, 3.0]));
        assert_eq!(f0.denominator(), &ComplexPoly::from_real(&[1.0, 0.0, 0.0, 2.0]));
        let finf = family_map(Point::Infinity);
        assert_eq!(finf.numerator(), &ComplexPoly::from_real(&[2.0, 0.0, 0.0, 1.0]));
        assert_eq!(finf.denominator(), &ComplexPoly::from_real(&[0.0, 3.0]));
    }

    #[test]
    fn one_is_fixed_across_family() {
        for a in [Complex64::new(0.3, 0.4), Complex64::new(-1.7, 0.2), Complex64::new(5.0, -3.0)] {
            let v = f_alpha(Point::Finite(a), Point::real(1.0));
            assert!(v.chordal(&Point::real(1.0)) < 1e-14);
        }
    }

    #[test]
    fn p1_examples() {
        let r = verify_p1(Point::real(0.0), 1e-10).unwrap();
        assert!(r.passed);
        let r = verify_p1(Point::Finite(Complex64::new(0.3, 0.4)), 1e-10).unwrap();
        assert!(r.passed, "{r:?}");
        let r = verify_p1(Point::real(1.0), 1e-10).unwrap();
        assert!(r.excluded && !r.passed);
    }

    #[test]
    fn x_y_a_examples() {
        assert_eq!(x_map(Point::real(0.0)), Point::real(0.0));
        assert_eq!(y_map(Point::real(0.0)), Point::real(0.0));
        assert_eq!(a_from_xy(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(y_map(Point::real(1.0)), Point::real(1.0));
        assert_eq!(y_map(Point::real(-1.0)), Point::real(1.0));
        let a = Complex64::new(0.7, -0.2);
        let y = y_map(Point::Finite(a)).finite().unwrap();
        assert!((a_from_xy(a * a, y).unwrap() - a).norm() < 1e-12);
        assert!(a_from_xy(Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.0)).is_err());
        assert_eq!(x_map(Point::Finite(-a)), x_map(Point::Finite(a)));
    }

    #[test]
    fn diagram_at_basepoint_and_infinity() {
        let d = verify_diagram(Complex64::new(0.0, 0.0), 1e-12).unwrap();
        assert!(d.passed);
        let inf = verify_infinity_chart(1e-10).unwrap();
        assert!(inf.passed, "{inf:?}");
        assert!(inf.critical_points.contains(&(Point::Infinity, 1)));
    }

    #[test]
    fn y_has_triple_preimage_at_one() {
        // Y(α) − 1 ∝ (α − 1)³(α + 1)
        let rep = theta_preimages(1e-10).unwrap();
        assert!(rep.y_set_matches() && rep.x_set_matches());
        assert_eq!(rep.y_multiplicities(), vec![3, 1, 3, 1, 3, 1]);
        assert_eq!(rep.x_multiplicities(), vec![1; 6]);
        assert!(rep.y_critical_value_deviation < 1e-10);
    }

    #[test]
    fn local_degree_is_two() {
        let fit = local_degree_at_basepoint(1e-3).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-3, "{fit:?}");
        assert!((fit.coefficient - 0.25).abs() < 1e-3);
        assert!((fit.complex_coefficient - 0.25).norm() < 1e-3);
    }
}
