//! Basin-of-attraction images for rational maps.
//!
//! Each pixel centre is iterated until it comes within `tol` (chordal) of a
//! point of an attracting cycle. Cycles are found from the critical orbits,
//! so every attracting cycle of the map is listed. `∞` needs no special
//! treatment because all distances are chordal; a pixel captured by the
//! cycle `{∞}` is labelled [`Label::Escape`].

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::poly::ComplexPoly;
use crate::rational::RationalMap;
use crate::sphere::{self, Point};
use crate::{Error, Result};

/// Iterations spent on each critical orbit before looking for a cycle.
pub const CYCLE_SEARCH_ITERATIONS: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Viewport {
    pub center: Complex64,
    pub width: f64,
    pub pixels_x: usize,
    pub pixels_y: usize,
}

impl Viewport {
    pub fn new(center: Complex64, width: f64, pixels_x: usize, pixels_y: usize) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::DegenerateInput(format!("viewport width must be positive, got {width}")));
        }
        if pixels_x == 0 || pixels_y == 0 {
            return Err(Error::DegenerateInput("image dimensions must be at least 1x1".into()));
        }
        Ok(Self {
            center,
            width,
            pixels_x,
            pixels_y,
        })
    }

    pub fn height(&self) -> f64 {
        self.width * self.pixels_y as f64 / self.pixels_x as f64
    }

    /// Centre of pixel `(col, row)`; row 0 is the top edge.
    pub fn pixel_center(&self, col: usize, row: usize) -> Complex64 {
        let step = self.width / self.pixels_x as f64;
        let x = self.center.re - self.width / 2.0 + (col as f64 + 0.5) * step;
        let y = self.center.im + self.height() / 2.0 - (row as f64 + 0.5) * step;
        Complex64::new(x, y)
    }
}

#[derive(Clone, Debug)]
pub struct AttractingCycle {
    pub points: Vec<Point>,
    pub multiplier: Complex64,
}

impl AttractingCycle {
    pub fn period(&self) -> usize {
        self.points.len()
    }

    pub fn is_infinity(&self) -> bool {
        self.points.len() == 1 && self.points[0].is_infinite()
    }

    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        sphere::contains(&self.points, p, tol)
    }
}

/// Attracting cycles reached by critical orbits, up to period `max_period`.
pub fn find_attracting_cycles(map: &RationalMap, max_period: usize, tol: f64) -> Result<Vec<AttractingCycle>> {
    let mut cycles: Vec<AttractingCycle> = Vec::new();
    for (c, _) in map.critical_points(1e-10)? {
        let mut z = c;
        for _ in 0..CYCLE_SEARCH_ITERATIONS {
            if let Some(points) = detect_cycle(map, z, max_period, tol) {
                if !cycles.iter().any(|cy| cy.contains(&points[0], tol.sqrt())) {
                    let multiplier = points
                        .iter()
                        .fold(Complex64::new(1.0, 0.0), |acc, p| acc * map.chart_derivative(*p));
                    if multiplier.norm() < 1.0 {
                        cycles.push(AttractingCycle { points, multiplier });
                    }
                }
                break;
            }
            z = map.eval(z);
        }
    }
    if cycles.is_empty() {
        return Err(Error::NonConvergence {
            iterations: CYCLE_SEARCH_ITERATIONS,
            residual: f64::NAN,
        });
    }
    for cy in &mut cycles {
        rotate_to_min(&mut cy.points);
    }
    cycles.sort_by(|a, b| a.points[0].lex_cmp(&b.points[0]));
    Ok(cycles)
}

fn detect_cycle(map: &RationalMap, z: Point, max_period: usize, tol: f64) -> Option<Vec<Point>> {
    let mut orbit = vec![z];
    let mut w = z;
    for _ in 0..max_period {
        w = map.eval(w);
        if w.chordal(&z) < tol {
            return Some(orbit);
        }
        orbit.push(w);
    }
    None
}

fn rotate_to_min(points: &mut [Point]) {
    let k = (0..points.len())
        .min_by(|&i, &j| points[i].lex_cmp(&points[j]))
        .unwrap_or(0);
    points.rotate_left(k);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Attractor(usize),
    Escape,
    Unresolved,
}

/// Label of `z` and the number of iterations taken to reach it.
pub fn classify_point(
    map: &RationalMap,
    cycles: &[AttractingCycle],
    z: Point,
    max_iter: usize,
    tol: f64,
) -> (Label, u32) {
    let mut w = z;
    for it in 0..=max_iter {
        for (k, cy) in cycles.iter().enumerate() {
            if cy.contains(&w, tol) {
                let label = if cy.is_infinity() { Label::Escape } else { Label::Attractor(k) };
                return (label, it as u32);
            }
        }
        if it < max_iter {
            w = map.eval(w);
        }
    }
    (Label::Unresolved, max_iter as u32)
}

#[derive(Clone, Debug)]
pub struct BasinImage {
    pub viewport: Viewport,
    pub labels: Vec<Label>,
    pub iterations: Vec<u32>,
    pub cycles: Vec<AttractingCycle>,
}

impl BasinImage {
    pub fn label_at(&self, col: usize, row: usize) -> Label {
        self.labels[row * self.viewport.pixels_x + col]
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn unresolved_fraction(&self) -> f64 {
        self.count(Label::Unresolved) as f64 / self.labels.len() as f64
    }

    /// Mean iteration count per label, in the order attractors, escape,
    /// unresolved.
    pub fn mean_iterations(&self) -> Vec<(Label, f64)> {
        let mut keys: Vec<Label> = (0..self.cycles.len())
            .filter(|&k| !self.cycles[k].is_infinity())
            .map(Label::Attractor)
            .collect();
        keys.push(Label::Escape);
        keys.push(Label::Unresolved);
        keys.into_iter()
            .filter_map(|key| {
                let its: Vec<u32> = self
                    .labels
                    .iter()
                    .zip(&self.iterations)
                    .filter(|(l, _)| **l == key)
                    .map(|(_, i)| *i)
                    .collect();
                (!its.is_empty()).then(|| (key, its.iter().map(|&i| i as f64).sum::<f64>() / its.len() as f64))
            })
            .collect()
    }
}

/// Labels every pixel of `viewport`. Rows are computed in parallel and
/// assembled in order, so the output does not depend on the thread count.
pub fn render_basins(
    map: &RationalMap,
    cycles: &[AttractingCycle],
    viewport: &Viewport,
    max_iter: usize,
    tol: f64,
) -> BasinImage {
    let rows: Vec<Vec<(Label, u32)>> = (0..viewport.pixels_y)
        .into_par_iter()
        .map(|row| {
            (0..viewport.pixels_x)
                .map(|col| {
                    let z = Point::Finite(viewport.pixel_center(col, row));
                    classify_point(map, cycles, z, max_iter, tol)
                })
                .collect()
        })
        .collect();
    let (labels, iterations) = rows.into_iter().flatten().unzip();
    BasinImage {
        viewport: *viewport,
        labels,
        iterations,
        cycles: cycles.to_vec(),
    }
}

#[derive(Clone, Debug, Default)]
pub struct SoundnessReport {
    pub checked: usize,
    pub failures: usize,
}

/// Re-iterates every `stride`-th labelled pixel `extra` steps past its
/// capture and checks that it stays within `10·tol` of its cycle.
pub fn soundness_check(map: &RationalMap, image: &BasinImage, tol: f64, stride: usize, extra: usize) -> SoundnessReport {
    let vp = &image.viewport;
    let mut rep = SoundnessReport::default();
    for idx in (0..image.labels.len()).step_by(stride.max(1)) {
        let cycle = match image.labels[idx] {
            Label::Attractor(k) => &image.cycles[k],
            Label::Escape => match image.cycles.iter().find(|c| c.is_infinity()) {
                Some(c) => c,
                None => continue,
            },
            Label::Unresolved => continue,
        };
        let mut w = Point::Finite(vp.pixel_center(idx % vp.pixels_x, idx / vp.pixels_x));
        for _ in 0..image.iterations[idx] as usize + extra {
            w = map.eval(w);
        }
        rep.checked += 1;
        if !cycle.contains(&w, 10.0 * tol) {
            rep.failures += 1;
        }
    }
    rep
}

pub type Rgb = [u8; 3];

pub const WHITE: Rgb = [255, 255, 255];
pub const LIGHT_GREY: Rgb = [191, 191, 191];
pub const DARK_GREY: Rgb = [96, 96, 96];
pub const BLACK: Rgb = [0, 0, 0];

#[derive(Clone, Debug)]
pub struct Palette {
    pub attractors: Vec<Rgb>,
    pub escape: Rgb,
    pub unresolved: Rgb,
    /// Pixels captured after more than this many iterations are drawn in
    /// the unresolved colour. This outlines Julia sets of zero area.
    pub slow_threshold: Option<u32>,
}

impl Palette {
    /// Shades of grey from white downwards, one per cycle.
    pub fn greyscale(cycles: &[AttractingCycle]) -> Self {
        let shades = [WHITE, LIGHT_GREY, DARK_GREY, [160, 160, 160], [64, 64, 64], [224, 224, 224]];
        Self {
            attractors: (0..cycles.len()).map(|k| shades[k % shades.len()]).collect(),
            escape: WHITE,
            unresolved: BLACK,
            slow_threshold: None,
        }
    }

    /// Assigns `color` to the cycle containing each representative point.
    pub fn by_representative(cycles: &[AttractingCycle], assignments: &[(Point, Rgb)], tol: f64) -> Result<Self> {
        let mut pal = Self::greyscale(cycles);
        for (p, color) in assignments {
            let k = cycles
                .iter()
                .position(|c| c.contains(p, tol))
                .ok_or_else(|| Error::DegenerateInput(format!("no attracting cycle through {p}")))?;
            pal.attractors[k] = *color;
            if cycles[k].is_infinity() {
                pal.escape = *color;
            }
        }
        Ok(pal)
    }

    pub fn color(&self, label: Label) -> Rgb {
        match label {
            Label::Attractor(k) => self.attractors.get(k).copied().unwrap_or(self.unresolved),
            Label::Escape => self.escape,
            Label::Unresolved => self.unresolved,
        }
    }
}

/// Binary PPM (`P6`) encoding.
pub fn encode_ppm(image: &BasinImage, palette: &Palette) -> Vec<u8> {
    let vp = &image.viewport;
    let mut out = format!("P6\n{} {}\n255\n", vp.pixels_x, vp.pixels_y).into_bytes();
    out.reserve(3 * image.labels.len());
    for (&l, &it) in image.labels.iter().zip(&image.iterations) {
        let slow = palette.slow_threshold.is_some_and(|t| it > t);
        out.extend_from_slice(&if slow { palette.unresolved } else { palette.color(l) });
    }
    out
}

pub fn write_ppm(image: &BasinImage, palette: &Palette, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&encode_ppm(image, palette))?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub map: RationalMap,
    pub center: Complex64,
    pub width: f64,
    /// Colour of the basin of the cycle through each point.
    pub colors: Vec<(Point, Rgb)>,
    /// Attracting cycles the map is known to have.
    pub expected_cycles: Vec<Vec<Point>>,
    pub slow_threshold: Option<u32>,
}

impl Preset {
    pub fn viewport(&self, pixels_x: usize, pixels_y: usize) -> Result<Viewport> {
        Viewport::new(self.center, self.width, pixels_x, pixels_y)
    }
}

/// `3z²/(2z³+1)`: basins of `0` (white), `1` (light grey) and `{ω, ω̄}`
/// (dark grey).
pub fn preset_fig1() -> Preset {
    let w = sphere::unit_root(3);
    Preset {
        name: "fig1",
        map: RationalMap::new(
            ComplexPoly::from_real(&[0.0, 0.0, 3.0]),
            ComplexPoly::from_real(&[1.0, 0.0, 0.0, 2.0]),
        )
        .expect("nonzero denominator"),
        center: Complex64::new(0.0, 0.0),
        width: 4.0,
        colors: vec![
            (Point::real(0.0), WHITE),
            (Point::real(1.0), LIGHT_GREY),
            (Point::Finite(w), DARK_GREY),
        ],
        expected_cycles: vec![
            vec![Point::real(0.0)],
            vec![Point::real(1.0)],
            vec![Point::Finite(w), Point::Finite(w.conj())],
        ],
        slow_threshold: None,
    }
}

/// `2i(z² − (1+i)/2)²`: only `∞` attracts (white). The Julia set is a
/// dendrite, outlined in black through the slow-capture threshold.
pub fn preset_fig3() -> Preset {
    let i = Complex64::new(0.0, 1.0);
    let c = Complex64::new(0.5, 0.5);
    let zero = Complex64::new(0.0, 0.0);
    Preset {
        name: "fig3",
        map: RationalMap::polynomial(ComplexPoly::new(vec![2.0 * i * c * c, zero, -4.0 * i * c, zero, 2.0 * i])),
        center: Complex64::new(0.0, 0.0),
        width: 3.2,
        colors: vec![(Point::Infinity, WHITE)],
        expected_cycles: vec![vec![Point::Infinity]],
        slow_threshold: Some(8),
    }
}

/// `z²(3 − z⁴)/2`: basins of `∞` (white), `0` (light grey), `1` (dark grey).
pub fn preset_fig4() -> Preset {
    Preset {
        name: "fig4",
        map: RationalMap::polynomial(ComplexPoly::from_real(&[0.0, 0.0, 1.5, 0.0, 0.0, 0.0, -0.5])),
        center: Complex64::new(0.0, 0.0),
        width: 3.5,
        colors: vec![
            (Point::Infinity, WHITE),
            (Point::real(0.0), LIGHT_GREY),
            (Point::real(1.0), DARK_GREY),
        ],
        expected_cycles: vec![vec![Point::real(0.0)], vec![Point::real(1.0)], vec![Point::Infinity]],
        slow_threshold: None,
    }
}

pub fn preset(name: &str) -> Option<Preset> {
    match name {
        "fig1" => Some(preset_fig1()),
        "fig3" => Some(preset_fig3()),
        "fig4" => Some(preset_fig4()),
        _ => None,
    }
}

/// Whether the found cycles are exactly `expected`, as sets of sets.
pub fn cycles_match(found: &[AttractingCycle], expected: &[Vec<Point>], tol: f64) -> bool {
    found.len() == expected.len()
        && expected.iter().all(|e| {
            found
                .iter()
                .any(|c| c.points.len() == e.len() && sphere::set_eq(&c.points, e, tol))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;

    #[test]
    fn preset_cycles_match_captions() {
        for p in [preset_fig1(), preset_fig3(), preset_fig4()] {
            let cycles = find_attracting_cycles(&p.map, 8, TOL).unwrap();
            assert!(cycles_match(&cycles, &p.expected_cycles, 1e-8), "{}: {cycles:?}", p.name);
            assert!(cycles.iter().all(|c| c.multiplier.norm() < 1e-3));
        }
    }

    #[test]
    fn fig3_one_is_repelling() {
        let p = preset_fig3();
        let m = p.map.chart_derivative(Point::real(1.0));
        assert!((m - Complex64::new(4.0, 4.0)).norm() < 1e-6);
    }

    #[test]
    fn attracting_point_labels_immediately() {
        let p = preset_fig1();
        let cycles = find_attracting_cycles(&p.map, 4, TOL).unwrap();
        let (l, it) = classify_point(&p.map, &cycles, Point::real(0.0), 10, 1e-6);
        assert_eq!(it, 0);
        assert!(matches!(l, Label::Attractor(_)));
    }

    #[test]
    fn ppm_single_white_pixel() {
        let vp = Viewport::new(Complex64::new(0.0, 0.0), 1.0, 1, 1).unwrap();
        let img = BasinImage {
            viewport: vp,
            labels: vec![Label::Attractor(0)],
            iterations: vec![0],
            cycles: vec![],
        };
        let pal = Palette {
            attractors: vec![WHITE],
            escape: BLACK,
            unresolved: BLACK,
            slow_threshold: None,
        };
        let bytes = encode_ppm(&img, &pal);
        assert_eq!(bytes, b"P6\n1 1\n255\n\xff\xff\xff".to_vec());
    }

    #[test]
    fn viewport_rejects_bad_input() {
        assert!(Viewport::new(Complex64::new(0.0, 0.0), 0.0, 4, 4).is_err());
        assert!(Viewport::new(Complex64::new(0.0, 0.0), 1.0, 0, 4).is_err());
        let vp = Viewport::new(Complex64::new(1.0, 1.0), 2.0, 2, 2).unwrap();
        assert_eq!(vp.pixel_center(0, 0), Complex64::new(0.5, 1.5));
    }

    #[test]
    fn fig1_symmetries() {
        let p = preset_fig1();
        let cycles = find_attracting_cycles(&p.map, 4, TOL).unwrap();
        let zero = cycles.iter().position(|c| c.contains(&Point::real(0.0), 1e-9)).unwrap();
        let w = sphere::unit_root(3);
        let label = |z: Complex64| classify_point(&p.map, &cycles, Point::Finite(z), 500, 1e-6).0;
        for k in 0..200 {
            let z = Complex64::from_polar(0.05 + 1.9 * (k as f64 / 200.0), 0.37 * k as f64);
            let l = label(z);
            assert_eq!(l == Label::Attractor(zero), label(w * z) == Label::Attractor(zero));
            assert_eq!(l, label(z.conj()));
        }
    }
}
