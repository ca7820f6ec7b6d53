//! Simultaneous (Aberth–Ehrlich) root finding.
//!
//! Initial guesses sit on a circle whose radius is the Cauchy bound, rotated
//! by a fixed irrational offset so that no guess starts on a symmetry axis of
//! a real polynomial. Exact zero roots are factored out before iterating.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::poly::ComplexPoly;
use crate::sphere::lex_cmp;
use crate::{Error, Result};

const MAX_ITERATIONS: usize = 800;
const ANGLE_OFFSET: f64 = 0.4;

/// Relative radius within which computed roots are treated as one multiple
/// root. Aberth spreads an m-fold root over roughly `ε^(1/m)`.
pub const CLUSTER_RADIUS: f64 = 1e-4;

/// All `deg p` roots of `p`, sorted lexicographically.
///
/// Each returned root satisfies `|p(r)| ≤ tol · Σ|c_k||r|^k` (backward error);
/// otherwise [`Error::NonConvergence`] is returned.
pub fn find_roots(p: &ComplexPoly, tol: f64) -> Result<Vec<Complex64>> {
    let Some(degree) = p.degree() else {
        return Err(Error::DegenerateInput("roots of the zero polynomial".into()));
    };
    let zeros = p.coeffs().iter().take_while(|c| c.norm_sqr() == 0.0).count();
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let rest = ComplexPoly::new(p.coeffs()[zeros..].to_vec());
    let m = degree - zeros;

    match m {
        0 => {}
        1 => roots.push(-rest.coeff(0) / rest.coeff(1)),
        _ => roots.extend(aberth(&rest, tol)?),
    }
    roots.sort_by(lex_cmp);
    Ok(roots)
}

fn aberth(p: &ComplexPoly, tol: f64) -> Result<Vec<Complex64>> {
    let degree = p.degree_or_zero();
    let lead = p.leading();
    let monic = p.scale(lead.inv());
    let dp = monic.derivative();

    let cauchy = 1.0
        + monic.coeffs()[..degree]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| Complex64::from_polar(cauchy, TAU * k as f64 / degree as f64 + ANGLE_OFFSET))
        .collect();

    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut max_step: f64 = 0.0;
        for k in 0..degree {
            let value = monic.eval(z[k]);
            if value.norm_sqr() == 0.0 {
                continue;
            }
            let ratio = value / dp.eval(z[k]);
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != k)
                .map(|j| {
                    let diff = z[k] - z[j];
                    if diff.norm_sqr() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        diff.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1.0));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }

    let residual = z
        .iter()
        .map(|&r| monic.eval(r).norm() / monic.eval_scale(r).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    if !residual.is_finite() || residual > tol {
        return Err(Error::NonConvergence {
            iterations,
            residual,
        });
    }
    Ok(z)
}

/// Roots grouped into `(root, multiplicity)` pairs.
///
/// Roots closer than [`CLUSTER_RADIUS`] (relative to `max(1, |r|)`) are
/// merged; the cluster centroid is then polished by Newton's method on
/// `p^(m-1)`, of which an m-fold root is a simple root.
pub fn find_roots_with_multiplicity(p: &ComplexPoly, tol: f64) -> Result<Vec<(Complex64, usize)>> {
    let roots = find_roots(p, tol)?;
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut members = vec![roots[i]];
        // grow the cluster transitively
        let mut grew = true;
        while grew {
            grew = false;
            for j in 0..roots.len() {
                if used[j] {
                    continue;
                }
                let near = members.iter().any(|&r| {
                    (r - roots[j]).norm() <= CLUSTER_RADIUS * r.norm().max(1.0)
                });
                if near {
                    used[j] = true;
                    members.push(roots[j]);
                    grew = true;
                }
            }
        }
        let m = members.len();
        let centroid = members.iter().sum::<Complex64>() / m as f64;
        out.push((polish_multiple(p, centroid, m), m));
    }
    out.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    Ok(out)
}

fn polish_multiple(p: &ComplexPoly, start: Complex64, m: usize) -> Complex64 {
    if m == 1 {
        return polish_simple(p, start);
    }
    let mut q = p.clone();
    for _ in 1..m {
        q = q.derivative();
    }
    let dq = q.derivative();
    let mut z = start;
    for _ in 0..4 {
        let d = dq.eval(z);
        if d.norm_sqr() == 0.0 {
            break;
        }
        let next = z - q.eval(z) / d;
        if !next.re.is_finite() || (next - start).norm() > CLUSTER_RADIUS * start.norm().max(1.0) {
            break;
        }
        z = next;
    }
    z
}

fn polish_simple(p: &ComplexPoly, start: Complex64) -> Complex64 {
    let dp = p.derivative();
    let mut z = start;
    for _ in 0..2 {
        let d = dp.eval(z);
        if d.norm_sqr() == 0.0 {
            break;
        }
        let next = z - p.eval(z) / d;
        if !next.re.is_finite() || (next - start).norm() > CLUSTER_RADIUS * start.norm().max(1.0) {
            break;
        }
        // keep the polished value only if it does not increase the residual
        if p.eval(next).norm() <= p.eval(z).norm() {
            z = next;
        } else {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-10;

    fn close_sets(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.len() == b.len()
            && a.iter().all(|x| b.iter().any(|y| (x - y).norm() < tol))
            && b.iter().all(|x| a.iter().any(|y| (x - y).norm() < tol))
    }

    #[test]
    fn quadratic() {
        let r = find_roots(&ComplexPoly::from_real(&[-1.0, 0.0, 1.0]), TOL).unwrap();
        assert!((r[0] + 1.0).norm() < 1e-14);
        assert!((r[1] - 1.0).norm() < 1e-14);
    }

    #[test]
    fn cube_roots_of_unity() {
        let r = find_roots(&ComplexPoly::from_real(&[-1.0, 0.0, 0.0, 1.0]), TOL).unwrap();
        let w = crate::sphere::unit_root(3);
        assert!(close_sets(&r, &[Complex64::new(1.0, 0.0), w, w.conj()], 1e-13));
        // ordering: -1/2 ± …, then 1
        assert!(r[0].im < 0.0 && r[1].im > 0.0 && (r[2].re - 1.0).abs() < 1e-13);
    }

    /// Independent oracle: bisection for the real root of c³+2c²+c+1, then
    /// the quadratic formula on the deflated quotient.
    fn rabbit_cubic_oracle() -> Vec<Complex64> {
        let f = |c: f64| c * c * c + 2.0 * c * c + c + 1.0;
        let (mut lo, mut hi) = (-2.0, -1.5);
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        // c³+2c²+c+1 = (c - r)(c² + (2+r)c + (1 + r(2+r)))
        let b = 2.0 + r;
        let c0 = 1.0 + r * b;
        let disc = Complex64::new(b * b - 4.0 * c0, 0.0).sqrt();
        vec![
            Complex64::new(r, 0.0),
            (-b + disc) / 2.0,
            (-b - disc) / 2.0,
        ]
    }

    #[test]
    fn rabbit_cubic_against_bisection_oracle() {
        let oracle = rabbit_cubic_oracle();
        assert!((oracle[0].re - -1.754877666246693).abs() < 1e-12);
        assert!((oracle[1] - Complex64::new(-0.122561166876653, 0.744861766619744)).norm() < 1e-12);
        let r = find_roots(&ComplexPoly::from_real(&[1.0, 1.0, 2.0, 1.0]), TOL).unwrap();
        assert!(close_sets(&r, &oracle, 1e-13));
    }

    #[test]
    fn zero_roots_are_exact() {
        let p = ComplexPoly::monomial(Complex64::new(3.0, 0.0), 5);
        let r = find_roots_with_multiplicity(&p, TOL).unwrap();
        assert_eq!(r, vec![(Complex64::new(0.0, 0.0), 5)]);
    }

    #[test]
    fn triple_root_is_clustered() {
        // (z-1)^3 (z+1)
        let p = ComplexPoly::expand_from_roots(&[
            (Complex64::new(1.0, 0.0), 3),
            (Complex64::new(-1.0, 0.0), 1),
        ]);
        let r = find_roots_with_multiplicity(&p, TOL).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].1, 1);
        assert_eq!(r[1].1, 3);
        assert!((r[1].0 - 1.0).norm() < 1e-12);
        assert!((r[0].0 + 1.0).norm() < 1e-12);
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        assert!(find_roots(&ComplexPoly::zero(), TOL).is_err());
        assert!(find_roots(&ComplexPoly::one(), TOL).unwrap().is_empty());
    }
}
