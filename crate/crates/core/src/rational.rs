//! Rational maps of the Riemann sphere as quotients of polynomials.

use num_complex::Complex64;
use serde::Deserialize;

use crate::poly::ComplexPoly;
use crate::sphere::{self, Point};
use crate::{Error, Result};

/// Relative threshold below which leading coefficients of derived
/// polynomials (e.g. the Wronskian `N'D - ND'`) are treated as cancelled.
const CANCEL_REL: f64 = 1e-13;

/// `N/D`. The representation is never reduced implicitly; callers are
/// expected to supply coprime numerator and denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    numerator: ComplexPoly,
    denominator: ComplexPoly,
}

impl RationalMap {
    pub fn new(numerator: ComplexPoly, denominator: ComplexPoly) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::DegenerateInput("denominator is identically zero".into()));
        }
        Ok(RationalMap {
            numerator,
            denominator,
        })
    }

    pub fn polynomial(p: ComplexPoly) -> Self {
        RationalMap {
            numerator: p,
            denominator: ComplexPoly::one(),
        }
    }

    pub fn numerator(&self) -> &ComplexPoly {
        &self.numerator
    }

    pub fn denominator(&self) -> &ComplexPoly {
        &self.denominator
    }

    pub fn is_polynomial(&self) -> bool {
        self.denominator.degree() == Some(0)
    }

    /// Topological degree `max(deg N, deg D)`.
    pub fn degree(&self) -> usize {
        self.numerator
            .degree_or_zero()
            .max(self.denominator.degree_or_zero())
    }

    /// Evaluation on the sphere. Points with `|z| > 1` are evaluated through
    /// the reversed polynomials in `u = 1/z`, so large arguments neither
    /// overflow nor lose the point at infinity.
    pub fn eval(&self, z: Point) -> Point {
        let dn = self.numerator.degree_or_zero();
        let dd = self.denominator.degree_or_zero();
        match z {
            Point::Infinity => match dn.cmp(&dd) {
                std::cmp::Ordering::Greater => Point::Infinity,
                std::cmp::Ordering::Equal => {
                    Point::from_ratio(self.numerator.leading(), self.denominator.leading())
                }
                std::cmp::Ordering::Less => Point::Finite(Complex64::new(0.0, 0.0)),
            },
            Point::Finite(z) if z.norm() <= 1.0 => {
                Point::from_ratio(self.numerator.eval(z), self.denominator.eval(z))
            }
            Point::Finite(z) => {
                // N(z)/D(z) = u^(dd-dn) · Nrev(u)/Drev(u)
                let u = z.inv();
                let num = self.numerator.eval_reversed(u, dn);
                let den = self.denominator.eval_reversed(u, dd);
                if dn >= dd {
                    Point::from_ratio(num, den * u.powu((dn - dd) as u32))
                } else {
                    Point::from_ratio(num * u.powu((dd - dn) as u32), den)
                }
            }
        }
    }

    pub fn eval_complex(&self, z: Complex64) -> Point {
        self.eval(Point::Finite(z))
    }

    /// The Wronskian `N'D - ND'` whose roots are the finite critical points.
    pub fn wronskian(&self) -> ComplexPoly {
        let a = &self.numerator.derivative() * &self.denominator;
        let b = &self.numerator * &self.denominator.derivative();
        (&a - &b).trim_relative(CANCEL_REL)
    }

    /// Critical points with multiplicity (local degree minus one), including
    /// `∞` when it is critical. The multiplicities sum to `2·deg − 2`.
    pub fn critical_points(&self, tol: f64) -> Result<Vec<(Point, usize)>> {
        let d = self.degree();
        if d == 0 {
            return Err(Error::DegenerateInput("constant map has no critical points".into()));
        }
        let w = self.wronskian();
        let mut out: Vec<(Point, usize)> = if w.degree_or_zero() == 0 {
            Vec::new()
        } else {
            w.roots_with_multiplicity(tol)?
                .into_iter()
                .map(|(z, m)| (Point::Finite(z), m))
                .collect()
        };
        let finite: usize = out.iter().map(|(_, m)| m).sum();
        let total = 2 * d - 2;
        if finite < total {
            out.push((Point::Infinity, total - finite));
        }
        Ok(out)
    }

    /// Critical values (images of critical points), without multiplicity.
    pub fn critical_values(&self, tol: f64, merge: f64) -> Result<Vec<Point>> {
        let mut values = Vec::new();
        for (c, _) in self.critical_points(tol)? {
            crate::sphere::insert_unique(&mut values, self.eval(c), merge);
        }
        Ok(values)
    }

    /// Preimages of `target` with multiplicity, including `∞` when it is a
    /// preimage.
    pub fn preimages(&self, target: Point, tol: f64) -> Result<Vec<(Point, usize)>> {
        let d = self.degree();
        let eq = match target {
            Point::Finite(a) => &self.numerator - &self.denominator.scale(a),
            Point::Infinity => self.denominator.clone(),
        };
        let eq = eq.trim_relative(CANCEL_REL);
        let mut out: Vec<(Point, usize)> = if eq.degree_or_zero() == 0 {
            Vec::new()
        } else {
            eq.roots_with_multiplicity(tol)?
                .into_iter()
                .map(|(z, m)| (Point::Finite(z), m))
                .collect()
        };
        let finite: usize = out.iter().map(|(_, m)| m).sum();
        if finite < d {
            out.push((Point::Infinity, d - finite));
        }
        Ok(out)
    }

    /// The composite `self ∘ inner`.
    pub fn compose(&self, inner: &RationalMap) -> RationalMap {
        let k = self.degree();
        let n_pows: Vec<ComplexPoly> = (0..=k).map(|i| inner.numerator.pow(i)).collect();
        let d_pows: Vec<ComplexPoly> = (0..=k).map(|i| inner.denominator.pow(i)).collect();
        let homogenise = |p: &ComplexPoly| {
            (0..=k).fold(ComplexPoly::zero(), |acc, i| {
                let term = (&n_pows[i] * &d_pows[k - i]).scale(p.coeff(i));
                &acc + &term
            })
        };
        RationalMap {
            numerator: homogenise(&self.numerator),
            denominator: homogenise(&self.denominator),
        }
    }

    /// Derivative of the map expressed in local charts at `z` and `f(z)`:
    /// the chart at a point `p` is `w` when `|p| ≤ 1` and `1/w` otherwise.
    /// Products of these along a cycle give its multiplier.
    pub fn chart_derivative(&self, z: Point) -> Complex64 {
        let image = self.eval(z);
        let to_src = chart_inverse(z);
        let to_dst = chart(image);
        let u0 = chart_coord(z);
        let h = 1e-6;
        let g = |u: Complex64| to_dst(self.eval(to_src(u)));
        let re = (g(u0 + h) - g(u0 - h)) / (2.0 * h);
        let im = (g(u0 + Complex64::new(0.0, h)) - g(u0 - Complex64::new(0.0, h))) / (2.0 * h);
        // holomorphic: f' = ∂f/∂x, averaged with -i ∂f/∂y for symmetry
        (re - Complex64::new(0.0, 1.0) * im) / 2.0
    }
}

/// Coefficient strings of a rational map, ascending degree. A missing
/// denominator means `1`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub numerator: String,
    pub denominator: Option<String>,
}

impl MapSpec {
    pub fn to_map(&self) -> Result<RationalMap> {
        let num = ComplexPoly::new(sphere::parse_coefficients(&self.numerator)?);
        let den = match &self.denominator {
            Some(d) => ComplexPoly::new(sphere::parse_coefficients(d)?),
            None => ComplexPoly::one(),
        };
        RationalMap::new(num, den)
    }

    /// Reads a map file with top-level `numerator` and optional
    /// `denominator` keys.
    pub fn map_from_toml_str(text: &str) -> Result<RationalMap> {
        let spec: MapSpec = toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string()))?;
        spec.to_map()
    }
}

fn uses_inverse_chart(p: Point) -> bool {
    match p {
        Point::Infinity => true,
        Point::Finite(z) => z.norm() > 1.0,
    }
}

fn chart_coord(p: Point) -> Complex64 {
    match p {
        Point::Infinity => Complex64::new(0.0, 0.0),
        Point::Finite(z) if z.norm() > 1.0 => z.inv(),
        Point::Finite(z) => z,
    }
}

fn chart_inverse(p: Point) -> impl Fn(Complex64) -> Point {
    let inverse = uses_inverse_chart(p);
    move |u| {
        if inverse {
            if u.norm_sqr() == 0.0 {
                Point::Infinity
            } else {
                Point::Finite(u.inv())
            }
        } else {
            Point::Finite(u)
        }
    }
}

fn chart(p: Point) -> impl Fn(Point) -> Complex64 {
    let inverse = uses_inverse_chart(p);
    move |q| match (inverse, q) {
        (true, Point::Infinity) => Complex64::new(0.0, 0.0),
        (true, Point::Finite(w)) => w.inv(),
        (false, Point::Finite(w)) => w,
        (false, Point::Infinity) => Complex64::new(f64::INFINITY, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::unit_root;

    const TOL: f64 = 1e-10;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn f_example() -> RationalMap {
        RationalMap::new(
            ComplexPoly::from_real(&[0.0, 0.0, 3.0]),
            ComplexPoly::from_real(&[1.0, 0.0, 0.0, 2.0]),
        )
        .unwrap()
    }

    #[test]
    fn power_map_critical_points() {
        let r = RationalMap::polynomial(ComplexPoly::from_real(&[0.0, 0.0, 1.0]));
        let cps = r.critical_points(TOL).unwrap();
        assert_eq!(cps, vec![(Point::real(0.0), 1), (Point::Infinity, 1)]);
    }

    #[test]
    fn cubic_example_critical_points() {
        let cps = f_example().critical_points(TOL).unwrap();
        assert_eq!(cps.len(), 4);
        assert!(cps.iter().all(|(_, m)| *m == 1));
        let w = unit_root(3);
        for target in [c(0.0, 0.0), c(1.0, 0.0), w, w.conj()] {
            assert!(cps
                .iter()
                .any(|(p, _)| p.chordal(&Point::Finite(target)) < 1e-12));
        }
    }

    #[test]
    fn eval_handles_poles_and_infinity() {
        let f = f_example();
        assert_eq!(f.eval(Point::Infinity), Point::real(0.0));
        let pole = Point::Finite(Complex64::new(-0.5f64.cbrt(), 0.0));
        assert!(f.eval(pole).chordal(&Point::Infinity) < 1e-10);
        assert_eq!(f.eval(Point::real(1.0)), Point::real(1.0));
        let big = f.eval(Point::real(1e200));
        assert!(big.chordal(&Point::real(0.0)) < 1e-150);
        let poly = RationalMap::polynomial(ComplexPoly::from_real(&[0.0, 0.0, 1.0]));
        assert_eq!(poly.eval(Point::real(1e200)), Point::Infinity);
    }

    #[test]
    fn composition_matches_pointwise() {
        let s = RationalMap::polynomial(ComplexPoly::from_real(&[0.0, 0.0, 1.0]));
        let g = f_example();
        let fg = g.compose(&s);
        for z in [c(0.3, 0.1), c(-1.2, 0.7), c(2.0, -3.0)] {
            let direct = g.eval(s.eval_complex(z));
            assert!(fg.eval_complex(z).chordal(&direct) < 1e-12);
        }
        assert_eq!(fg.degree(), 6);
    }

    #[test]
    fn preimages_count_with_multiplicity() {
        let s = RationalMap::polynomial(ComplexPoly::from_real(&[0.0, 0.0, 1.0]));
        let pre = s.preimages(Point::real(0.0), TOL).unwrap();
        assert_eq!(pre, vec![(Point::real(0.0), 2)]);
        let pre_inf = s.preimages(Point::Infinity, TOL).unwrap();
        assert_eq!(pre_inf, vec![(Point::Infinity, 2)]);
        let pre_one = s.preimages(Point::real(1.0), TOL).unwrap();
        assert_eq!(pre_one.len(), 2);
    }

    #[test]
    fn chart_derivative_at_infinity() {
        // z ↦ z² has multiplier 0 at ∞; 1/z^2 near ∞ in u-coordinates is u².
        let sq = RationalMap::polynomial(ComplexPoly::from_real(&[0.0, 0.0, 1.0]));
        assert!(sq.chart_derivative(Point::Infinity).norm() < 1e-6);
        // z ↦ 2z at 0
        let lin = RationalMap::polynomial(ComplexPoly::from_real(&[0.0, 2.0]));
        assert!((lin.chart_derivative(Point::real(0.0)) - 2.0).norm() < 1e-8);
        // z ↦ z² at the repelling fixed point 1
        let q = RationalMap::polynomial(ComplexPoly::from_real(&[0.0, 0.0, 1.0]));
        assert!((q.chart_derivative(Point::real(1.0)) - 2.0).norm() < 1e-8);
    }

    #[test]
    fn map_file_parsing() {
        let m = MapSpec::map_from_toml_str("numerator = \"0 0 3\"\ndenominator = \"1 0 0 2\"").unwrap();
        assert_eq!(m.degree(), 3);
        let p = MapSpec::map_from_toml_str("numerator = \"0.3 0 1\"").unwrap();
        assert!(p.is_polynomial());
        assert!(MapSpec::map_from_toml_str("numerator = \"1\"\nextra = 1").is_err());
        assert!(MapSpec::map_from_toml_str("numerator = \"1\"\ndenominator = \"0\"").is_err());
    }
}
