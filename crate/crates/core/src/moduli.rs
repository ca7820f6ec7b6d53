//! The homogeneous endomorphism `G_f` of `ℂ^{n+1}` attached to a polynomial
//! whose critical points are all periodic, and the induced map `g_f` on
//! `ℙⁿ`.
//!
//! Finite marked points `p₀ … p_{n+1}` are indexed in portrait order with
//! `p₀` pinned to the origin, so a moduli point is a vector
//! `a = (a₁, …, a_{n+1})` with `a₀ = 0` implicit. For such `a`,
//! `F_a` is the monic degree-`d` polynomial with critical points `a_k` of
//! multiplicity `m_k` that vanishes at `a_{ν(0)}`, and
//! `G_f(a) = (F_a(a_{ν(1)}), …, F_a(a_{ν(n+1)}))`.

use std::ops::Index;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, CMatrix};
use crate::poly::ComplexPoly;
use crate::portrait::RamificationPortrait;
use crate::{Error, Result};

/// Default finite-difference step (relative to `max(1, |a_i|)`).
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// `delta_distance` below this value counts as lying on the forbidden locus.
pub const DELTA_THRESHOLD: f64 = 1e-9;

/// Coordinates `(a₁, …, a_{n+1})`; `a₀ = 0` is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuliVector(pub Vec<Complex64>);

impl ModuliVector {
    pub fn new(coords: Vec<Complex64>) -> Self {
        ModuliVector(coords)
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `(0, a₁, …, a_{n+1})`.
    pub fn with_origin(&self) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(Complex64::new(0.0, 0.0));
        v.extend_from_slice(&self.0);
        v
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ModuliVector(self.0.iter().map(|&z| z * c).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        linalg::sup_norm(&self.0)
    }

    /// Representative of the projective class whose largest-modulus
    /// coordinate (first one on ties) equals 1. The zero vector is returned
    /// unchanged.
    pub fn normalized(&self) -> Self {
        match max_index(&self.0) {
            Some(j) => self.normalized_at(j),
            None => self.clone(),
        }
    }

    /// Representative with coordinate `j` equal to 1.
    pub fn normalized_at(&self, j: usize) -> Self {
        let pivot = self.0[j];
        if pivot.norm_sqr() == 0.0 {
            return self.clone();
        }
        ModuliVector(self.0.iter().map(|&z| z / pivot).collect())
    }

    /// Distance from the class of `self` to the forbidden locus: the minimum
    /// of `|a_i|` and `|a_i − a_j|` after scaling to `‖a‖_∞ = 1`. Zero for
    /// the zero vector.
    pub fn delta_distance(&self) -> f64 {
        let norm = self.sup_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let a: Vec<Complex64> = self.0.iter().map(|z| z / norm).collect();
        let mut best = f64::INFINITY;
        for i in 0..a.len() {
            best = best.min(a[i].norm());
            for j in i + 1..a.len() {
                best = best.min((a[i] - a[j]).norm());
            }
        }
        best
    }

    pub fn on_delta(&self) -> bool {
        self.delta_distance() < DELTA_THRESHOLD
    }
}

impl Index<usize> for ModuliVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

fn max_index(v: &[Complex64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > 0.0 && best.is_none_or(|(_, b)| m > b) {
            best = Some((i, m));
        }
    }
    best.map(|(i, _)| i)
}

/// Distance between projective classes in the affine chart of `p`: both
/// representatives are scaled so that the largest-modulus coordinate of `p`
/// equals 1, then compared in the sup norm.
pub fn chart_distance(p: &ModuliVector, q: &ModuliVector) -> f64 {
    let Some(j) = max_index(&p.0) else {
        return if q.sup_norm() == 0.0 { 0.0 } else { f64::INFINITY };
    };
    let pn = p.normalized_at(j);
    let qn = if q.0[j].norm() > 1e-300 {
        q.normalized_at(j)
    } else {
        q.normalized()
    };
    pn.0.iter()
        .zip(&qn.0)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

/// Compiled data of the endomorphism for one portrait.
#[derive(Clone, Debug)]
pub struct GfMap {
    degree: usize,
    n: usize,
    mu: Vec<usize>,
    nu: Vec<usize>,
    multiplicities: Vec<u32>,
    labels: Vec<String>,
    portrait: RamificationPortrait,
}

impl GfMap {
    /// Compiles a polynomial portrait whose critical points are all periodic
    /// and whose marked-point map is a permutation.
    pub fn build(portrait: &RamificationPortrait) -> Result<Self> {
        let report = portrait.validate()?;
        if !report.polynomial {
            return Err(Error::Hypothesis("portrait is not polynomial".into()));
        }
        if !report.is_permutation {
            return Err(Error::Hypothesis(
                "marked points are not permuted (some point is strictly preperiodic)".into(),
            ));
        }
        if !report.all_critical_periodic {
            return Err(Error::Hypothesis("not all critical points are periodic".into()));
        }
        let finite = portrait.finite_count();
        if finite < 3 {
            return Err(Error::Hypothesis(format!(
                "need at least 3 finite marked points for a non-trivial moduli space, got {finite}"
            )));
        }
        // `inf` sits last in the ordering and is fixed, so restricting to the
        // first `finite` indices keeps μ and ν permutations.
        let mu = report.mu.expect("permutation")[..finite].to_vec();
        let nu = report.nu.expect("permutation")[..finite].to_vec();
        Ok(GfMap {
            degree: report.degree as usize,
            n: finite - 2,
            mu,
            nu,
            multiplicities: report.multiplicities[..finite].to_vec(),
            labels: report.ordering[..finite].to_vec(),
            portrait: portrait.clone(),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Dimension of the projective space; there are `n + 2` finite marked
    /// points and `n + 1` moduli coordinates.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn mu(&self) -> &[usize] {
        &self.mu
    }

    pub fn nu(&self) -> &[usize] {
        &self.nu
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn portrait(&self) -> &RamificationPortrait {
        &self.portrait
    }

    /// The monic polynomial `F_a`.
    pub fn monic_poly(&self, a: &ModuliVector) -> ComplexPoly {
        let full = a.with_origin();
        let roots: Vec<(Complex64, usize)> = full
            .iter()
            .zip(&self.multiplicities)
            .filter(|(_, &m)| m > 0)
            .map(|(&z, &m)| (z, m as usize))
            .collect();
        let integrand = ComplexPoly::expand_from_roots(&roots)
            .scale(Complex64::new(self.degree as f64, 0.0));
        integrand.antiderivative(full[self.nu[0]])
    }

    /// `G_f(a)`.
    pub fn eval(&self, a: &ModuliVector) -> ModuliVector {
        assert_eq!(a.len(), self.dim(), "moduli vector has wrong dimension");
        let full = a.with_origin();
        let f = self.monic_poly(a);
        ModuliVector((1..=self.n + 1).map(|j| f.eval(full[self.nu[j]])).collect())
    }

    /// `g_f([a])`, normalised so the largest-modulus coordinate is 1.
    pub fn eval_chart(&self, a: &ModuliVector) -> Result<ModuliVector> {
        let norm = a.sup_norm();
        if norm == 0.0 {
            return Err(Error::DegenerateInput("the zero vector is not a projective point".into()));
        }
        let image = self.eval(a);
        if image.sup_norm() < 1e-14 * norm.powi(self.degree as i32) {
            return Err(Error::NumericalDegeneracy(
                "image is numerically the zero class".into(),
            ));
        }
        Ok(image.normalized())
    }

    /// Central-difference Jacobian matrix of `G_f` at `a` and its
    /// determinant. `G_f` is holomorphic, so a real step gives the complex
    /// partial derivative.
    pub fn jacobian(&self, a: &ModuliVector, step: f64) -> (CMatrix, Complex64) {
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for j in 0..dim {
            let h = step * a[j].norm().max(1.0);
            let mut plus = a.clone();
            let mut minus = a.clone();
            plus.0[j] += h;
            minus.0[j] -= h;
            let gp = self.eval(&plus);
            let gm = self.eval(&minus);
            for i in 0..dim {
                m[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let det = linalg::determinant(&m);
        (m, det)
    }

    /// `J(a) = ∏_{0≤i<j≤n+1} (a_i − a_j)^{m_i+m_j}` with `a₀ = 0`.
    pub fn closed_form_j(&self, a: &ModuliVector) -> Complex64 {
        let full = a.with_origin();
        let mut out = Complex64::new(1.0, 0.0);
        for i in 0..full.len() {
            for j in i + 1..full.len() {
                let e = self.multiplicities[i] + self.multiplicities[j];
                if e > 0 {
                    out *= (full[i] - full[j]).powu(e);
                }
            }
        }
        out
    }

    /// Total degree of `J`; equals `(n+1)(d−1)`.
    pub fn j_degree(&self) -> usize {
        let k = self.multiplicities.len();
        let mut total = 0;
        for i in 0..k {
            for j in i + 1..k {
                total += (self.multiplicities[i] + self.multiplicities[j]) as usize;
            }
        }
        total
    }

    /// Derivative of `g_f` in the affine chart `x_j = 1` at a fixed class,
    /// where `j` is the largest-modulus coordinate of `fixed`.
    pub fn chart_jacobian(&self, fixed: &ModuliVector, step: f64) -> Result<CMatrix> {
        let base = fixed.normalized();
        let j = max_index(&base.0)
            .ok_or_else(|| Error::DegenerateInput("zero vector".into()))?;
        let free: Vec<usize> = (0..self.dim()).filter(|&i| i != j).collect();
        let chart = |v: &ModuliVector| -> Vec<Complex64> {
            let img = self.eval(v).normalized_at(j);
            free.iter().map(|&i| img[i]).collect()
        };
        let mut m = CMatrix::zeros(free.len(), free.len());
        for (col, &i) in free.iter().enumerate() {
            let h = step * base[i].norm().max(1.0);
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus.0[i] += h;
            minus.0[i] -= h;
            let (gp, gm) = (chart(&plus), chart(&minus));
            for row in 0..free.len() {
                m[(row, col)] = (gp[row] - gm[row]) / (2.0 * h);
            }
        }
        Ok(m)
    }
}

/// Minimum `delta_distance` of the random points used by the sampled checks.
pub const SAMPLE_SEPARATION: f64 = 0.05;

/// Uniform point of `[-1, 1]^{2(n+1)}` whose coordinates (with `a₀ = 0`)
/// are pairwise at least [`SAMPLE_SEPARATION`] apart.
pub fn random_off_delta<R: Rng>(dim: usize, rng: &mut R) -> ModuliVector {
    loop {
        let v = ModuliVector::new(
            (0..dim)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        );
        if v.delta_distance() >= SAMPLE_SEPARATION {
            return v;
        }
    }
}

#[derive(Clone, Debug)]
pub struct JacobianCheck {
    pub ratios: Vec<Complex64>,
    /// Mean of `det Jac G_f / J`.
    pub constant: Complex64,
    /// `max |ratio − constant| / |constant|`.
    pub relative_spread: f64,
}

/// Samples `det Jac G_f(a) / J(a)` at random off-diagonal points.
pub fn jacobian_identity_check(gf: &GfMap, samples: usize, rng_seed: u64) -> JacobianCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let ratios: Vec<Complex64> = (0..samples)
        .map(|_| {
            let a = random_off_delta(gf.dim(), &mut rng);
            let (_, det) = gf.jacobian(&a, DEFAULT_FD_STEP);
            det / gf.closed_form_j(&a)
        })
        .collect();
    let constant = ratios.iter().sum::<Complex64>() / ratios.len().max(1) as f64;
    let relative_spread = ratios
        .iter()
        .map(|r| (r - constant).norm() / constant.norm())
        .fold(0.0, f64::max);
    JacobianCheck {
        ratios,
        constant,
        relative_spread,
    }
}

#[derive(Clone, Debug)]
pub struct DeltaCheck {
    pub samples: usize,
    pub failures: usize,
    /// Largest `|b_{μ(i)} − b_{μ(j)}| / max(1, ‖b‖)` over the samples.
    pub max_gap: f64,
}

/// Forces a random collision `a_i = a_j` and checks `b_{μ(i)} = b_{μ(j)}`
/// for `b = G_f(a)` (with `b₀ = 0`).
pub fn delta_invariance_check(gf: &GfMap, samples: usize, rng_seed: u64, tol: f64) -> DeltaCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let k = gf.dim() + 1;
    let mut failures = 0;
    let mut max_gap: f64 = 0.0;
    for _ in 0..samples {
        let mut a = random_off_delta(gf.dim(), &mut rng);
        let i = rng.gen_range(0..k);
        let j = (i + rng.gen_range(1..k)) % k;
        let target = if j == 0 { Complex64::new(0.0, 0.0) } else { a[j - 1] };
        if i == 0 {
            a.0[j - 1] = Complex64::new(0.0, 0.0);
        } else {
            a.0[i - 1] = target;
        }
        let mut b = vec![Complex64::new(0.0, 0.0)];
        b.extend(gf.eval(&a).0);
        let scale = linalg::sup_norm(&b).max(1.0);
        let gap = (b[gf.mu[i]] - b[gf.mu[j]]).norm() / scale;
        max_gap = max_gap.max(gap);
        if gap > tol {
            failures += 1;
        }
    }
    DeltaCheck {
        samples,
        failures,
        max_gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portrait::examples;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mv(v: &[(f64, f64)]) -> ModuliVector {
        ModuliVector(v.iter().map(|&(a, b)| c(a, b)).collect())
    }

    #[test]
    fn rabbit_build() {
        let gf = GfMap::build(&examples::rabbit()).unwrap();
        assert_eq!(gf.degree(), 2);
        assert_eq!(gf.n(), 1);
        assert_eq!(gf.multiplicities(), &[1, 0, 0]);
        assert_eq!(gf.nu(), &[2, 0, 1]);
        assert_eq!(gf.j_degree(), 2);
    }

    #[test]
    fn build_rejects_hypothesis_violations() {
        let err = GfMap::build(&examples::quartic()).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(_)));
        assert!(GfMap::build(&examples::cubic_galois()).is_err());
        assert!(GfMap::build(&examples::cubic_fixed_critical()).is_ok());
    }

    #[test]
    fn rabbit_eval_matches_hand_expansion() {
        // F_a(z) = z² − a₂², G(a) = (−a₂², a₁² − a₂²)
        let gf = GfMap::build(&examples::rabbit()).unwrap();
        assert_eq!(gf.eval(&mv(&[(1.0, 0.0), (1.0, 0.0)])), mv(&[(-1.0, 0.0), (0.0, 0.0)]));
        let a = mv(&[(0.3, -0.7), (1.1, 0.4)]);
        let g = gf.eval(&a);
        assert!((g[0] + a[1] * a[1]).norm() < 1e-14);
        assert!((g[1] - (a[0] * a[0] - a[1] * a[1])).norm() < 1e-14);
        assert_eq!(gf.eval(&mv(&[(0.0, 0.0), (0.0, 0.0)])), mv(&[(0.0, 0.0), (0.0, 0.0)]));
    }

    #[test]
    fn rabbit_chart_and_scale_invariance() {
        let gf = GfMap::build(&examples::rabbit()).unwrap();
        let img = gf.eval_chart(&mv(&[(1.0, 0.0), (1.0, 0.0)])).unwrap();
        assert_eq!(img, mv(&[(1.0, 0.0), (0.0, 0.0)]));
        let a = mv(&[(0.2, 0.9), (-0.4, 0.3)]);
        let b = a.scale(c(2.0, 0.0));
        let (x, y) = (gf.eval_chart(&a).unwrap(), gf.eval_chart(&b).unwrap());
        assert!(chart_distance(&x, &y) < 1e-14);
        assert!(gf.eval_chart(&mv(&[(0.0, 0.0), (0.0, 0.0)])).is_err());
    }

    #[test]
    fn rabbit_jacobian_matches_hand_derivative() {
        let gf = GfMap::build(&examples::rabbit()).unwrap();
        let a = mv(&[(0.4, -0.2), (-0.9, 0.6)]);
        let (m, det) = gf.jacobian(&a, DEFAULT_FD_STEP);
        let expect = [
            [c(0.0, 0.0), -2.0 * a[1]],
            [2.0 * a[0], -2.0 * a[1]],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[(i, j)] - expect[i][j]).norm() < 1e-9);
            }
        }
        assert!((det - 4.0 * a[0] * a[1]).norm() < 1e-9);
        assert!((gf.closed_form_j(&a) - a[0] * a[1]).norm() < 1e-15);
        let on_delta = mv(&[(0.0, 0.0), (0.5, 0.5)]);
        assert!(gf.jacobian(&on_delta, DEFAULT_FD_STEP).1.norm() < 1e-9);
    }

    #[test]
    fn delta_distance_examples() {
        assert_eq!(mv(&[(1.0, 0.0), (1.0, 0.0)]).delta_distance(), 0.0);
        assert!((mv(&[(1.0, 0.0), (0.5, 0.0)]).delta_distance() - 0.5).abs() < 1e-15);
        assert_eq!(mv(&[(0.0, 0.0), (0.0, 0.0)]).delta_distance(), 0.0);
        assert!(mv(&[(2.0, 0.0), (0.0, 0.0)]).on_delta());
    }

    #[test]
    fn chart_distance_is_projective() {
        let a = mv(&[(0.3, 0.1), (-1.0, 2.0)]);
        assert!(chart_distance(&a, &a.scale(c(-3.0, 1.0))) < 1e-15);
        let b = mv(&[(0.3, 0.1), (-1.0, 2.05)]);
        assert!(chart_distance(&a, &b) > 1e-3);
    }

    #[test]
    fn sampled_jacobian_ratio_is_constant() {
        let gf = GfMap::build(&examples::rabbit()).unwrap();
        let chk = jacobian_identity_check(&gf, 50, 7);
        assert!((chk.constant - c(4.0, 0.0)).norm() < 1e-8, "{:?}", chk.constant);
        assert!(chk.relative_spread < 1e-6);
        let gf4 = GfMap::build(&examples::quadratic_period(4)).unwrap();
        assert!(jacobian_identity_check(&gf4, 50, 7).relative_spread < 1e-6);
    }

    #[test]
    fn sampled_delta_invariance() {
        for p in [examples::rabbit(), examples::quadratic_period(4), examples::quadratic_period(5)] {
            let gf = GfMap::build(&p).unwrap();
            let chk = delta_invariance_check(&gf, 200, 3, 1e-10);
            assert_eq!(chk.failures, 0, "{chk:?}");
        }
    }
}
