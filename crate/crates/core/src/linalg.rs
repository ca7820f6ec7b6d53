//! Thin wrappers over nalgebra for the small dense complex systems that
//! appear in Newton iterations and Jacobian checks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Solves `m x = b` by partially pivoted LU; `None` when singular.
pub fn solve(m: &CMatrix, b: &[Complex64]) -> Option<Vec<Complex64>> {
    let rhs = DVector::from_column_slice(b);
    let x = m.clone().lu().solve(&rhs)?;
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Some(x.iter().copied().collect())
    } else {
        None
    }
}

pub fn determinant(m: &CMatrix) -> Complex64 {
    m.clone().lu().determinant()
}

pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    m.clone().lu().try_inverse()
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &CMatrix) -> Option<f64> {
    if m.nrows() == 1 {
        return Some(m[(0, 0)].norm());
    }
    let eig = m.clone().schur().eigenvalues()?;
    Some(eig.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `max_i |v_i|`.
pub fn sup_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_and_determinant() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(1.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let x = solve(&m, &[Complex64::new(4.0, 0.0), Complex64::new(2.0, 2.0)]).unwrap();
        assert!((x[0] - 2.0).norm() < 1e-14);
        assert!((x[1] - 2.0).norm() < 1e-14);
        assert!((determinant(&m) - Complex64::new(-2.0, -2.0)).norm() < 1e-14);
        let singular = CMatrix::zeros(2, 2);
        assert!(solve(&singular, &[Complex64::new(1.0, 0.0); 2]).is_none());
    }

    #[test]
    fn spectral_radius_of_diagonal() {
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, -3.0),
        ]));
        assert!((spectral_radius(&m).unwrap() - 3.0).abs() < 1e-12);
    }
}
