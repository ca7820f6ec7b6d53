//! Fixed points of `G_f`, recovery of the corresponding postcritically
//! finite polynomials, and iteration of a local inverse branch of `g_f`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{match_portrait, numeric_portrait};
use crate::linalg::{self, CMatrix};
use crate::moduli::{chart_distance, GfMap, ModuliVector, DEFAULT_FD_STEP};
use crate::poly::ComplexPoly;
use crate::portrait::RamificationPortrait;
use crate::rational::RationalMap;
use crate::sphere::{lex_cmp, Point};
use crate::{Error, Result};

/// Converged points closer than this (chart distance) are the same class.
pub const DEDUP_DISTANCE: f64 = 1e-6;
/// Fixed points this close to the forbidden locus are not certified.
pub const ON_DELTA_DISTANCE: f64 = 1e-6;
/// Newton step damping: halvings tried before declaring a stall.
const MAX_HALVINGS: usize = 20;
/// Seeds are drawn uniformly from the polydisk of this radius.
const SEED_RADIUS: f64 = 2.0;

#[derive(Clone, Debug)]
pub struct FixedPointConfig {
    pub seeds: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub rng_seed: u64,
    /// Tolerance for polynomial recovery and orbit-closure certification.
    pub certify_tol: f64,
    /// Maximum number of new orbit points during certification.
    pub certify_max_iter: usize,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig {
            seeds: 200,
            tol: 1e-12,
            max_iter: 200,
            rng_seed: 0,
            certify_tol: 1e-9,
            certify_max_iter: 64,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FixedPointRecord {
    pub a: ModuliVector,
    /// `‖G_f(a) − a‖_∞`, recomputed after Newton has stopped.
    pub residual: f64,
    pub delta_distance: f64,
    pub on_delta: bool,
    pub recovered_poly: Option<ComplexPoly>,
    pub certification: Option<CertificationReport>,
    pub certified: bool,
}

#[derive(Clone, Debug)]
pub struct FixedPointSweep {
    pub records: Vec<FixedPointRecord>,
    pub converged_seeds: usize,
    pub non_converged_seeds: usize,
}

impl FixedPointSweep {
    pub fn off_delta(&self) -> impl Iterator<Item = &FixedPointRecord> {
        self.records.iter().filter(|r| !r.on_delta)
    }
}

/// Newton's method on `H(a) = G_f(a) − a` from `cfg.seeds` pseudo-random
/// starting points. Seeds run in parallel; the reduction is sequential and
/// ordered, so the result depends only on `cfg`.
pub fn newton_fixed_points(gf: &GfMap, cfg: &FixedPointConfig) -> FixedPointSweep {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let seeds: Vec<ModuliVector> = (0..cfg.seeds)
        .map(|_| {
            ModuliVector::new(
                (0..gf.dim())
                    .map(|_| {
                        let r = SEED_RADIUS * rng.gen::<f64>().sqrt();
                        let t = std::f64::consts::TAU * rng.gen::<f64>();
                        Complex64::from_polar(r, t)
                    })
                    .collect(),
            )
        })
        .collect();

    let results: Vec<Option<ModuliVector>> = seeds
        .par_iter()
        .map(|s| newton_affine(gf, s, cfg.tol, cfg.max_iter))
        .collect();

    let mut converged: Vec<(ModuliVector, f64)> = Vec::new();
    let mut non_converged = 0;
    for r in results {
        match r {
            Some(mut a) => {
                // the only fixed point of tiny norm is the origin
                if a.sup_norm() < 1e-6 {
                    a = ModuliVector::new(vec![Complex64::new(0.0, 0.0); gf.dim()]);
                }
                let residual = residual(gf, &a);
                if residual <= cfg.tol {
                    converged.push((a, residual));
                } else {
                    non_converged += 1;
                }
            }
            None => non_converged += 1,
        }
    }
    let converged_seeds = converged.len();

    converged.sort_by(|x, y| x.1.total_cmp(&y.1).then_with(|| cmp_vec(&x.0, &y.0)));
    let mut kept: Vec<(ModuliVector, f64)> = Vec::new();
    for (a, r) in converged {
        if !kept.iter().any(|(b, _)| same_class(b, &a)) {
            kept.push((a, r));
        }
    }
    kept.sort_by(|x, y| cmp_vec(&x.0, &y.0));

    let records = kept
        .into_iter()
        .map(|(a, residual)| {
            let delta_distance = a.delta_distance();
            let on_delta = delta_distance < ON_DELTA_DISTANCE;
            let mut record = FixedPointRecord {
                a,
                residual,
                delta_distance,
                on_delta,
                recovered_poly: None,
                certification: None,
                certified: false,
            };
            if !on_delta {
                if let Ok(poly) = recover_polynomial(gf, &record, cfg.certify_tol) {
                    if let Ok(report) =
                        certify_pcf(&poly, gf.portrait(), cfg.certify_tol, cfg.certify_max_iter)
                    {
                        record.certified = report.certified;
                        record.certification = Some(report);
                    }
                    record.recovered_poly = Some(poly);
                }
            }
            record
        })
        .collect();

    FixedPointSweep {
        records,
        converged_seeds,
        non_converged_seeds: non_converged,
    }
}

fn same_class(a: &ModuliVector, b: &ModuliVector) -> bool {
    let (za, zb) = (a.sup_norm() == 0.0, b.sup_norm() == 0.0);
    if za || zb {
        return za && zb;
    }
    chart_distance(a, b) < DEDUP_DISTANCE
}

fn cmp_vec(a: &ModuliVector, b: &ModuliVector) -> std::cmp::Ordering {
    for (x, y) in a.coords().iter().zip(b.coords()) {
        let o = lex_cmp(x, y);
        if o.is_ne() {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// `‖G_f(a) − a‖_∞`.
pub fn residual(gf: &GfMap, a: &ModuliVector) -> f64 {
    let g = gf.eval(a);
    g.coords()
        .iter()
        .zip(a.coords())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn newton_affine(gf: &GfMap, seed: &ModuliVector, tol: f64, max_iter: usize) -> Option<ModuliVector> {
    let dim = gf.dim();
    let mut a = seed.clone();
    let mut r = residual(gf, &a);
    for _ in 0..max_iter {
        if r <= tol {
            return Some(a);
        }
        let g = gf.eval(&a);
        let h: Vec<Complex64> = (0..dim).map(|i| a[i] - g[i]).collect();
        let (mut jac, _) = gf.jacobian(&a, DEFAULT_FD_STEP);
        for i in 0..dim {
            jac[(i, i)] -= 1.0;
        }
        let delta = linalg::solve(&jac, &h)?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand = ModuliVector::new((0..dim).map(|i| a[i] + delta[i] * t).collect());
            let rc = residual(gf, &cand);
            if rc < r {
                accepted = Some((cand, rc));
                break;
            }
            t *= 0.5;
        }
        let (cand, rc) = accepted?;
        a = cand;
        r = rc;
        if a.sup_norm() > 1e8 {
            return None;
        }
    }
    (r <= tol).then_some(a)
}

/// The monic polynomial `F_a` of a converged, off-locus fixed point, after
/// checking `F_a(a_{ν(k)}) = a_k` for every finite marked point.
pub fn recover_polynomial(gf: &GfMap, record: &FixedPointRecord, tol: f64) -> Result<ComplexPoly> {
    if record.on_delta {
        return Err(Error::Hypothesis("fixed point lies on the forbidden locus".into()));
    }
    let poly = gf.monic_poly(&record.a);
    let full = record.a.with_origin();
    let scale = record.a.sup_norm().max(1.0);
    let deviation = (0..full.len())
        .map(|k| (poly.eval(full[gf.nu()[k]]) - full[k]).norm())
        .fold(0.0, f64::max);
    if deviation > tol * scale {
        return Err(Error::CorruptFixedPoint { deviation });
    }
    Ok(poly)
}

#[derive(Clone, Debug)]
pub struct OrbitDiagnostic {
    pub critical_point: Point,
    pub multiplicity: u32,
    pub tail: usize,
    pub cycle: usize,
    pub max_deviation: f64,
}

#[derive(Clone, Debug)]
pub struct CertificationReport {
    pub certified: bool,
    pub max_deviation: f64,
    pub orbits: Vec<OrbitDiagnostic>,
    /// Numeric point assigned to each declared label (portrait order).
    pub assignment: Vec<(String, Point)>,
    pub failure: Option<String>,
}

/// Checks numerically that `poly` realises `portrait`: its critical orbits
/// close up within `tol` and the resulting marked-point dynamics is
/// isomorphic to the declared portrait.
pub fn certify_pcf(
    poly: &ComplexPoly,
    portrait: &RamificationPortrait,
    tol: f64,
    max_iter: usize,
) -> Result<CertificationReport> {
    if poly.degree_or_zero() < 1 {
        return Err(Error::DegenerateInput("constant polynomial".into()));
    }
    certify_map(&RationalMap::polynomial(poly.clone()), portrait, tol, max_iter)
}

/// [`certify_pcf`] for an arbitrary rational map.
pub fn certify_map(
    map: &RationalMap,
    portrait: &RamificationPortrait,
    tol: f64,
    max_iter: usize,
) -> Result<CertificationReport> {
    portrait.validate()?;
    let np = match numeric_portrait(map, 1e-10, tol, max_iter)? {
        Ok(np) => np,
        Err(reason) => {
            return Ok(CertificationReport {
                certified: false,
                max_deviation: f64::INFINITY,
                orbits: Vec::new(),
                assignment: Vec::new(),
                failure: Some(format!("critical orbits do not close: {reason}")),
            })
        }
    };
    let g = &np.graph;
    let orbits: Vec<OrbitDiagnostic> = (0..g.points.len())
        .filter(|&i| np.multiplicity[i] > 0)
        .map(|i| {
            let (tail, cycle) = g.orbit_shape(i);
            let mut k = i;
            let mut dev: f64 = 0.0;
            for _ in 0..tail + cycle {
                dev = dev.max(g.deviation[k]);
                k = g.image[k];
            }
            OrbitDiagnostic {
                critical_point: g.points[i],
                multiplicity: np.multiplicity[i],
                tail,
                cycle,
                max_deviation: dev,
            }
        })
        .collect();
    let max_deviation = g.max_deviation();
    let matched = match_portrait(portrait, &np);
    let (certified, failure, assignment) = match matched {
        Some(assign) => {
            let labels = portrait.ordering();
            let assignment = labels
                .iter()
                .zip(&assign)
                .map(|(p, &j)| (p.label.clone(), g.points[j]))
                .collect();
            let ok = max_deviation < tol;
            let failure = (!ok).then(|| format!("orbit deviation {max_deviation:.3e} ≥ {tol:.1e}"));
            (ok, failure, assignment)
        }
        None => (
            false,
            Some(format!(
                "marked-point dynamics ({} points) is not isomorphic to the declared portrait ({} points)",
                g.points.len(),
                portrait.points.len()
            )),
            Vec::new(),
        ),
    };
    Ok(CertificationReport {
        certified,
        max_deviation,
        orbits,
        assignment,
        failure,
    })
}

#[derive(Clone, Debug)]
pub struct PullbackOrbit {
    pub points: Vec<ModuliVector>,
    /// Chart distance of each point to the nearest supplied fixed class.
    pub distances: Vec<f64>,
    /// Newton failed to converge before `steps` were completed.
    pub stalled: bool,
}

/// Iterates a local inverse branch of `g_f`: `x_{k+1}` solves
/// `g_f(x_{k+1}) = x_k` by Newton's method seeded at `x_k`. Branch
/// continuity is the selection rule; a jump larger than 0.5 in chart
/// distance is reported as [`Error::BranchLost`].
pub fn pullback_orbit(
    gf: &GfMap,
    start: &ModuliVector,
    steps: usize,
    tol: f64,
    fixed_classes: &[ModuliVector],
) -> Result<PullbackOrbit> {
    if start.on_delta() {
        return Err(Error::DegenerateInput("start point lies on the forbidden locus".into()));
    }
    let dist = |x: &ModuliVector| {
        fixed_classes
            .iter()
            .map(|f| chart_distance(f, x))
            .fold(f64::INFINITY, f64::min)
    };
    let mut x = start.normalized();
    let mut points = vec![x.clone()];
    let mut distances = vec![dist(&x)];
    let mut stalled = false;
    for step in 1..=steps {
        match inverse_step(gf, &x, tol) {
            Some(next) => {
                let jump = chart_distance(&x, &next);
                if jump > 0.5 {
                    return Err(Error::BranchLost { step, jump });
                }
                x = next;
                distances.push(dist(&x));
                points.push(x.clone());
            }
            None => {
                stalled = true;
                break;
            }
        }
    }
    Ok(PullbackOrbit {
        points,
        distances,
        stalled,
    })
}

/// One Newton solve of `G_f(b) = λ x` with the largest coordinate of `x`
/// pinned to 1 in `b`.
fn inverse_step(gf: &GfMap, x: &ModuliVector, tol: f64) -> Option<ModuliVector> {
    let x = x.normalized();
    let dim = gf.dim();
    let j = (0..dim).find(|&i| (x[i] - 1.0).norm() == 0.0)?;
    let free: Vec<usize> = (0..dim).filter(|&i| i != j).collect();

    let embed = |v: &[Complex64]| {
        let mut b = vec![Complex64::new(1.0, 0.0); dim];
        for (k, &i) in free.iter().enumerate() {
            b[i] = v[k];
        }
        ModuliVector::new(b)
    };
    // unknowns: free coordinates of b, then λ
    let resid = |v: &[Complex64]| -> Vec<Complex64> {
        let g = gf.eval(&embed(v));
        let lambda = v[dim - 1];
        (0..dim).map(|i| g[i] - lambda * x[i]).collect()
    };
    let mut v: Vec<Complex64> = free.iter().map(|&i| x[i]).collect();
    v.push(gf.eval(&x)[j]);

    let norm = |r: &[Complex64]| linalg::sup_norm(r);
    let mut r = resid(&v);
    for _ in 0..100 {
        let scale = v[dim - 1].norm().max(1.0);
        if norm(&r) <= tol * scale {
            return Some(embed(&v).normalized());
        }
        let mut jac = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let h = DEFAULT_FD_STEP * v[col].norm().max(1.0);
            let mut plus = v.clone();
            let mut minus = v.clone();
            plus[col] += h;
            minus[col] -= h;
            let (rp, rm) = (resid(&plus), resid(&minus));
            for row in 0..dim {
                jac[(row, col)] = (rp[row] - rm[row]) / (2.0 * h);
            }
        }
        let neg: Vec<Complex64> = r.iter().map(|z| -z).collect();
        let delta = linalg::solve(&jac, &neg)?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<Complex64> = v.iter().zip(&delta).map(|(a, d)| a + d * t).collect();
            let rc = resid(&cand);
            if norm(&rc) < norm(&r) {
                v = cand;
                r = rc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            let scale = v[dim - 1].norm().max(1.0);
            return (norm(&r) <= tol * scale * 1e3).then(|| embed(&v).normalized());
        }
    }
    None
}

/// Spectral radius of the derivative of the inverse branch of `g_f` at a
/// fixed class, i.e. of the inverse of the chart Jacobian of `g_f`.
pub fn inverse_branch_rate(gf: &GfMap, fixed: &ModuliVector) -> Result<f64> {
    let jac = gf.chart_jacobian(fixed, DEFAULT_FD_STEP)?;
    let inv = linalg::inverse(&jac)
        .ok_or_else(|| Error::NumericalDegeneracy("chart Jacobian is singular".into()))?;
    linalg::spectral_radius(&inv)
        .ok_or_else(|| Error::NumericalDegeneracy("eigenvalue computation failed".into()))
}
