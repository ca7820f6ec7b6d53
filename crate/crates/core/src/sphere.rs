//! Points of the Riemann sphere, the chordal metric, and the `re,im` text
//! encoding of complex numbers.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;

use crate::{Error, Result};

/// A point of `ℂ ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Finite(Complex64),
    Infinity,
}

impl Point {
    /// Wraps a complex number, mapping non-finite values to `∞`.
    pub fn from_complex(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            Point::Finite(z)
        } else {
            Point::Infinity
        }
    }

    /// Point given by homogeneous coordinates `[num : den]`.
    pub fn from_ratio(num: Complex64, den: Complex64) -> Self {
        if den.norm_sqr() == 0.0 {
            Point::Infinity
        } else {
            Point::from_complex(num / den)
        }
    }

    pub fn real(x: f64) -> Self {
        Point::Finite(Complex64::new(x, 0.0))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            Point::Finite(z) => Some(z),
            Point::Infinity => None,
        }
    }

    /// Chordal distance, normalised so that `d(0, ∞) = 2`.
    pub fn chordal(&self, other: &Point) -> f64 {
        match (*self, *other) {
            (Point::Infinity, Point::Infinity) => 0.0,
            (Point::Finite(z), Point::Infinity) | (Point::Infinity, Point::Finite(z)) => {
                2.0 / 1f64.hypot(z.norm())
            }
            (Point::Finite(z), Point::Finite(w)) => {
                2.0 * (z - w).norm() / (1f64.hypot(z.norm()) * 1f64.hypot(w.norm()))
            }
        }
    }

    /// Total order used for deterministic reporting: finite points
    /// lexicographically by real then imaginary part, `∞` last.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        match (self, other) {
            (Point::Infinity, Point::Infinity) => Ordering::Equal,
            (Point::Infinity, _) => Ordering::Greater,
            (_, Point::Infinity) => Ordering::Less,
            (Point::Finite(a), Point::Finite(b)) => lex_cmp(a, b),
        }
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::from_complex(z)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Infinity => f.write_str("inf"),
            Point::Finite(z) => f.write_str(&format_complex(*z)),
        }
    }
}

pub fn lex_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Parses `re,im` (or a bare real `re`).
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let text = text.trim();
    let bad = || Error::Parse(format!("invalid complex literal `{text}` (expected `re,im`)"));
    let mut parts = text.split(',');
    let re = parts.next().ok_or_else(bad)?.trim();
    let im = parts.next().map(str::trim);
    if parts.next().is_some() {
        return Err(bad());
    }
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = match im {
        Some(s) => s.parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

/// Parses a sphere point: `inf` or a complex literal.
pub fn parse_point(text: &str) -> Result<Point> {
    match text.trim() {
        "inf" | "infinity" | "∞" => Ok(Point::Infinity),
        other => parse_complex(other).map(Point::Finite),
    }
}

/// Parses a coefficient list: complex literals separated by `;` or
/// whitespace, ascending degree.
pub fn parse_coefficients(text: &str) -> Result<Vec<Complex64>> {
    let coeffs: Vec<Complex64> = text
        .split(|c: char| c == ';' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(parse_complex)
        .collect::<Result<_>>()?;
    if coeffs.is_empty() {
        return Err(Error::Parse("empty coefficient list".into()));
    }
    Ok(coeffs)
}

/// Fixed-precision `re,im` rendering. Negative zeros print as zeros so that
/// reports are byte-stable.
pub fn format_complex(z: Complex64) -> String {
    format!("{:.12},{:.12}", clean(z.re), clean(z.im))
}

fn clean(x: f64) -> f64 {
    if x.abs() < 5e-13 {
        0.0
    } else {
        x
    }
}

/// Primitive n-th root of unity `exp(2πi/n)`.
pub fn unit_root(n: usize) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU / n as f64)
}

/// The n-th roots of unity, generated by repeated multiplication with a
/// single final renormalisation to modulus one.
pub fn roots_of_unity(n: usize) -> Vec<Complex64> {
    let step = unit_root(n);
    let mut out = Vec::with_capacity(n);
    let mut z = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        out.push(z / z.norm());
        z *= step;
    }
    out
}

/// Whether `p` lies within `tol` (chordal) of some element of `set`.
pub fn contains(set: &[Point], p: &Point, tol: f64) -> bool {
    set.iter().any(|q| q.chordal(p) < tol)
}

/// Appends `p` unless it is already present up to `tol`.
pub fn insert_unique(set: &mut Vec<Point>, p: Point, tol: f64) {
    if !contains(set, &p, tol) {
        set.push(p);
    }
}

/// Sorted, de-duplicated copy of `points`.
pub fn canonical_set(points: &[Point], tol: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for p in points {
        insert_unique(&mut out, *p, tol);
    }
    out.sort_by(Point::lex_cmp);
    out
}

/// Whether two finite sets agree up to `tol`, ignoring order.
pub fn set_eq(a: &[Point], b: &[Point], tol: f64) -> bool {
    a.iter().all(|p| contains(b, p, tol)) && b.iter().all(|p| contains(a, p, tol))
}

/// Largest distance from an element of one set to the other set.
pub fn hausdorff(a: &[Point], b: &[Point]) -> f64 {
    let one_way = |x: &[Point], y: &[Point]| {
        x.iter()
            .map(|p| y.iter().map(|q| p.chordal(q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

pub fn format_set(points: &[Point]) -> String {
    let items: Vec<String> = points.iter().map(|p| p.to_string()).collect();
    format!("{{{}}}", items.join("; "))
}
