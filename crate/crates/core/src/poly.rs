//! Dense complex polynomials in ascending-coefficient form.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::roots;
use crate::Result;

/// Polynomial `c₀ + c₁z + … + c_d z^d`.
///
/// Trailing zero coefficients are always trimmed, so the zero polynomial is
/// the empty coefficient vector.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

impl ComplexPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| c.norm_sqr() == 0.0) {
            coeffs.pop();
        }
        ComplexPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        ComplexPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    /// `c·z^k`.
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// `z - r`.
    pub fn linear_factor(r: Complex64) -> Self {
        Self::new(vec![-r, Complex64::new(1.0, 0.0)])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial counted as degree 0.
    pub fn degree_or_zero(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Monic polynomial vanishing at each root with the given multiplicity.
    /// An empty list gives the constant 1.
    pub fn expand_from_roots(roots: &[(Complex64, usize)]) -> Self {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &(r, m) in roots {
            for _ in 0..m {
                coeffs.push(Complex64::new(0.0, 0.0));
                for k in (1..coeffs.len()).rev() {
                    let lower = coeffs[k - 1];
                    coeffs[k] = lower - r * coeffs[k];
                }
                coeffs[0] = -r * coeffs[0];
            }
        }
        Self::new(coeffs)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `Σ |c_k| |z|^k`, the natural scale for the rounding error of [`eval`](Self::eval).
    pub fn eval_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// Evaluates the reversed polynomial `u^d p(1/u)` where `d` is `degree`.
    /// Used for evaluation near infinity.
    pub fn eval_reversed(&self, u: Complex64, degree: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..=degree {
            acc = acc * u + self.coeff(k);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// The antiderivative `P` with `P' = self` and `P(base) = 0`.
    pub fn antiderivative(&self, base: Complex64) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Complex64::new(0.0, 0.0));
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k + 1) as f64),
        );
        let mut p = Self::new(coeffs);
        let shift = p.eval(base);
        if let Some(c0) = p.coeffs.first_mut() {
            *c0 -= shift;
        } else if shift.norm_sqr() != 0.0 {
            p.coeffs.push(-shift);
        }
        Self::new(p.coeffs)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&x| x * c).collect())
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Copy with trailing coefficients below `rel · max|c_k|` removed.
    pub fn trim_relative(&self, rel: f64) -> Self {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() <= rel * max) {
            coeffs.pop();
        }
        Self::new(coeffs)
    }

    /// `max |c_k|`.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// All roots, sorted lexicographically. See [`roots::find_roots`].
    pub fn roots(&self, tol: f64) -> Result<Vec<Complex64>> {
        roots::find_roots(self, tol)
    }

    /// Roots grouped by multiplicity. See [`roots::find_roots_with_multiplicity`].
    pub fn roots_with_multiplicity(&self, tol: f64) -> Result<Vec<(Complex64, usize)>> {
        roots::find_roots_with_multiplicity(self, tol)
    }
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;
    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;
    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;
    fn neg(self) -> ComplexPoly {
        ComplexPoly::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPoly::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ComplexPoly::new(out)
    }
}
