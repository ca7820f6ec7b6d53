//! Forward orbit closure on the sphere and numeric ramification portraits.
//!
//! A postcritically finite orbit must *land* on a point it has already
//! visited. Orbits that merely converge to an attracting cycle (including
//! `∞`) are detected by the accumulation rule: a newly generated point that
//! is within [`ACCUMULATION_RADIUS`] of a known point, but not within the
//! merge tolerance, means the orbit is creeping towards an attractor and the
//! set is reported as not closed.

use crate::portrait::{orbit_shape, RamificationPortrait};
use crate::rational::RationalMap;
use crate::sphere::Point;
use crate::Result;

/// Chordal radius of the accumulation rule.
pub const ACCUMULATION_RADIUS: f64 = 1e-4;

/// A finite forward-invariant set with the induced map on its points.
#[derive(Clone, Debug)]
pub struct OrbitGraph {
    pub points: Vec<Point>,
    pub image: Vec<usize>,
    /// Chordal distance between the computed image and the marked point it
    /// was identified with, per point.
    pub deviation: Vec<f64>,
}

impl OrbitGraph {
    pub fn max_deviation(&self) -> f64 {
        self.deviation.iter().copied().fold(0.0, f64::max)
    }

    pub fn orbit_shape(&self, i: usize) -> (usize, usize) {
        orbit_shape(&self.image, i)
    }
}

#[derive(Clone, Debug)]
pub enum Closure {
    Closed(OrbitGraph),
    NotClosed { points: Vec<Point>, reason: String },
}

impl Closure {
    pub fn is_closed(&self) -> bool {
        matches!(self, Closure::Closed(_))
    }
}

/// Smallest forward-invariant set containing `seeds`, with points merged at
/// chordal distance `tol`. At most `max_steps` new points are generated.
pub fn forward_closure(map: &RationalMap, seeds: &[Point], tol: f64, max_steps: usize) -> Closure {
    let mut points: Vec<Point> = Vec::new();
    for s in seeds {
        if !points.iter().any(|p| p.chordal(s) < tol) {
            points.push(*s);
        }
    }
    let mut image = Vec::new();
    let mut deviation = Vec::new();
    let mut generated = 0;
    let mut i = 0;
    while i < points.len() {
        let q = map.eval(points[i]);
        let (best, dist) = nearest(&points, &q);
        if dist < tol {
            // A genuine landing: no other marked point near points[i] may
            // already map onto the same target.
            let creeping = points.iter().enumerate().any(|(k, p)| {
                k != i
                    && p.chordal(&points[i]) < ACCUMULATION_RADIUS
                    && map.eval(*p).chordal(&points[best]) < tol
            });
            if creeping {
                return Closure::NotClosed {
                    points,
                    reason: format!("orbit accumulates at {}", q),
                };
            }
            image.push(best);
            deviation.push(dist);
        } else {
            if dist < ACCUMULATION_RADIUS {
                return Closure::NotClosed {
                    points,
                    reason: format!("orbit accumulates at {} (gap {dist:.3e})", q),
                };
            }
            generated += 1;
            if generated > max_steps {
                return Closure::NotClosed {
                    points,
                    reason: format!("still growing after {max_steps} new points"),
                };
            }
            image.push(points.len());
            deviation.push(0.0);
            points.push(q);
        }
        i += 1;
    }
    Closure::Closed(OrbitGraph {
        points,
        image,
        deviation,
    })
}

fn nearest(points: &[Point], q: &Point) -> (usize, f64) {
    points
        .iter()
        .enumerate()
        .map(|(k, p)| (k, p.chordal(q)))
        .fold((usize::MAX, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// Numeric portrait: critical points plus their forward orbits, with the
/// multiplicity of each point as a critical point.
#[derive(Clone, Debug)]
pub struct NumericPortrait {
    pub graph: OrbitGraph,
    pub multiplicity: Vec<u32>,
}

/// Extracts the ramification portrait of `map`, or explains why the
/// critical orbits do not close.
pub fn numeric_portrait(
    map: &RationalMap,
    root_tol: f64,
    tol: f64,
    max_steps: usize,
) -> Result<std::result::Result<NumericPortrait, String>> {
    let critical = map.critical_points(root_tol)?;
    let seeds: Vec<Point> = critical.iter().map(|(p, _)| *p).collect();
    match forward_closure(map, &seeds, tol, max_steps) {
        Closure::Closed(graph) => {
            let multiplicity = graph
                .points
                .iter()
                .map(|p| {
                    critical
                        .iter()
                        .filter(|(c, _)| c.chordal(p) < tol)
                        .map(|(_, m)| *m as u32)
                        .sum()
                })
                .collect();
            Ok(Ok(NumericPortrait {
                graph,
                multiplicity,
            }))
        }
        Closure::NotClosed { reason, .. } => Ok(Err(reason)),
    }
}

/// Finds a label-to-point bijection that respects images and
/// multiplicities. For polynomial portraits `inf` must go to `∞`.
pub fn match_portrait(declared: &RamificationPortrait, numeric: &NumericPortrait) -> Option<Vec<usize>> {
    let image = declared.image_indices().ok()?;
    let order = declared.ordering();
    let n = order.len();
    if n != numeric.graph.points.len() {
        return None;
    }
    let mult: Vec<u32> = order.iter().map(|p| p.multiplicity).collect();
    let shape: Vec<(usize, usize)> = (0..n).map(|i| orbit_shape(&image, i)).collect();
    let nshape: Vec<(usize, usize)> = (0..n).map(|i| numeric.graph.orbit_shape(i)).collect();
    let is_inf: Vec<bool> = order.iter().map(|p| p.is_infinity()).collect();

    let compatible = |i: usize, j: usize| {
        mult[i] == numeric.multiplicity[j]
            && shape[i] == nshape[j]
            && (!is_inf[i] || numeric.graph.points[j].is_infinite())
    };

    // assign points with the longest tails first; images are then forced
    let mut order_idx: Vec<usize> = (0..n).collect();
    order_idx.sort_by_key(|&i| std::cmp::Reverse(shape[i].0));

    let mut assign = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if search(&order_idx, 0, &image, &numeric.graph.image, &compatible, &mut assign, &mut used) {
        Some(assign)
    } else {
        None
    }
}

fn search(
    order: &[usize],
    pos: usize,
    image: &[usize],
    nimage: &[usize],
    compatible: &dyn Fn(usize, usize) -> bool,
    assign: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    let Some(&i) = order.get(pos) else {
        return true;
    };
    if assign[i] != usize::MAX {
        return search(order, pos + 1, image, nimage, compatible, assign, used);
    }
    for j in 0..nimage.len() {
        if used[j] || !compatible(i, j) {
            continue;
        }
        let snapshot = (assign.clone(), used.clone());
        if propagate(i, j, image, nimage, compatible, assign, used)
            && search(order, pos + 1, image, nimage, compatible, assign, used)
        {
            return true;
        }
        *assign = snapshot.0;
        *used = snapshot.1;
    }
    false
}

/// Assigns `i ↦ j` and follows the forward orbits, failing on conflicts.
fn propagate(
    mut i: usize,
    mut j: usize,
    image: &[usize],
    nimage: &[usize],
    compatible: &dyn Fn(usize, usize) -> bool,
    assign: &mut [usize],
    used: &mut [bool],
) -> bool {
    loop {
        if assign[i] != usize::MAX {
            return assign[i] == j;
        }
        if used[j] || !compatible(i, j) {
            return false;
        }
        assign[i] = j;
        used[j] = true;
        i = image[i];
        j = nimage[j];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ComplexPoly;
    use crate::portrait::examples;
    use num_complex::Complex64;

    #[test]
    fn square_map_closes() {
        let f = RationalMap::polynomial(ComplexPoly::from_real(&[0.0, 0.0, 1.0]));
        let np = numeric_portrait(&f, 1e-10, 1e-9, 64).unwrap().unwrap();
        assert_eq!(np.graph.points.len(), 2);
        assert_eq!(np.multiplicity, vec![1, 1]);
    }

    #[test]
    fn escaping_orbit_is_not_closed() {
        let f = RationalMap::polynomial(ComplexPoly::from_real(&[0.3, 0.0, 1.0]));
        let closure = forward_closure(&f, &[Point::real(0.0), Point::Infinity], 1e-9, 64);
        assert!(!closure.is_closed());
    }

    #[test]
    fn attracting_fixed_point_is_not_closed() {
        // z² + 0.1 has an attracting fixed point; the critical orbit only
        // converges to it.
        let f = RationalMap::polynomial(ComplexPoly::from_real(&[0.1, 0.0, 1.0]));
        let closure = forward_closure(&f, &[Point::real(0.0)], 1e-9, 500);
        assert!(!closure.is_closed());
    }

    #[test]
    fn sextic_matches_its_portrait() {
        let f = RationalMap::polynomial(ComplexPoly::from_real(&[0.0, 0.0, 1.5, 0.0, 0.0, 0.0, -0.5]));
        let np = numeric_portrait(&f, 1e-10, 1e-9, 64).unwrap().unwrap();
        assert!(match_portrait(&examples::sextic(), &np).is_some());
        assert!(match_portrait(&examples::quartic(), &np).is_none());
    }

    #[test]
    fn quartic_matches_its_portrait() {
        let w = Complex64::new(0.5, 0.5);
        let inner = ComplexPoly::new(vec![-w, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let f = RationalMap::polynomial((&inner * &inner).scale(Complex64::new(0.0, 2.0)));
        let np = numeric_portrait(&f, 1e-10, 1e-9, 64).unwrap().unwrap();
        assert_eq!(np.graph.points.len(), 6);
        assert!(match_portrait(&examples::quartic(), &np).is_some());
    }
}
