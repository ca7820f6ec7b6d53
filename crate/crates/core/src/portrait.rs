//! Ramification portraits: finite marked-point dynamics with critical
//! multiplicities.
//!
//! Portrait files are TOML:
//!
//! ```toml
//! degree = 2
//! polynomial = true
//!
//! [[points]]
//! label = "p0"
//! image = "p1"
//! multiplicity = 1
//! ```
//!
//! Multiplicities are stored raw as *local degree minus one*. The label
//! `inf` is reserved for the point at infinity; for polynomial portraits it
//! is added automatically (fixed, multiplicity `d-1`) when absent.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const INFINITY_LABEL: &str = "inf";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkedPoint {
    pub label: String,
    #[serde(rename = "image")]
    pub image_label: String,
    #[serde(default)]
    pub multiplicity: u32,
}

impl MarkedPoint {
    pub fn new(label: &str, image: &str, multiplicity: u32) -> Self {
        MarkedPoint {
            label: label.to_string(),
            image_label: image.to_string(),
            multiplicity,
        }
    }

    pub fn is_infinity(&self) -> bool {
        self.label == INFINITY_LABEL
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamificationPortrait {
    pub degree: u32,
    #[serde(rename = "polynomial")]
    pub polynomial_flag: bool,
    pub points: Vec<MarkedPoint>,
}

/// Result of [`RamificationPortrait::validate`].
///
/// `ordering` lists labels in index order: finite points in file order,
/// then `inf` when present. `mu` and `nu` are expressed in these indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub degree: u32,
    pub n: i64,
    pub polynomial: bool,
    pub all_critical_periodic: bool,
    pub is_permutation: bool,
    pub ordering: Vec<String>,
    pub multiplicities: Vec<u32>,
    pub mu: Option<Vec<usize>>,
    pub nu: Option<Vec<usize>>,
}

impl RamificationPortrait {
    /// Builds a portrait, inserting the fixed point at infinity for
    /// polynomial portraits that do not list it.
    pub fn new(degree: u32, polynomial: bool, mut points: Vec<MarkedPoint>) -> Self {
        if polynomial && !points.iter().any(MarkedPoint::is_infinity) {
            points.push(MarkedPoint::new(
                INFINITY_LABEL,
                INFINITY_LABEL,
                degree.saturating_sub(1),
            ));
        }
        RamificationPortrait {
            degree,
            polynomial_flag: polynomial,
            points,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RamificationPortrait =
            toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string()))?;
        Ok(Self::new(raw.degree, raw.polynomial_flag, raw.points))
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("portrait serialises")
    }

    /// Labels in index order: finite points in file order, `inf` last.
    pub fn ordering(&self) -> Vec<&MarkedPoint> {
        let mut out: Vec<&MarkedPoint> = self.points.iter().filter(|p| !p.is_infinity()).collect();
        out.extend(self.points.iter().filter(|p| p.is_infinity()));
        out
    }

    /// Number of finite marked points.
    pub fn finite_count(&self) -> usize {
        self.points.iter().filter(|p| !p.is_infinity()).count()
    }

    /// Image map in index order; fails on dangling or duplicate labels.
    pub fn image_indices(&self) -> Result<Vec<usize>> {
        let order = self.ordering();
        let mut index = HashMap::new();
        for (i, p) in order.iter().enumerate() {
            if index.insert(p.label.as_str(), i).is_some() {
                return Err(Error::DuplicateLabel(p.label.clone()));
            }
        }
        order
            .iter()
            .map(|p| {
                index
                    .get(p.image_label.as_str())
                    .copied()
                    .ok_or_else(|| Error::DanglingLabel {
                        label: p.label.clone(),
                        image: p.image_label.clone(),
                    })
            })
            .collect()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.ordering()
            .iter()
            .position(|p| p.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        let d = self.degree;
        if d < 2 {
            return Err(Error::DegreeTooSmall(d));
        }
        let image = self.image_indices()?;
        let order = self.ordering();
        let multiplicities: Vec<u32> = order.iter().map(|p| p.multiplicity).collect();

        if self.polynomial_flag {
            let inf = order.iter().position(|p| p.is_infinity()).expect("inserted by new");
            if image[inf] != inf {
                return Err(Error::Hypothesis("polynomial portrait must fix `inf`".into()));
            }
            if multiplicities[inf] != d - 1 {
                return Err(Error::MultiplicitySum {
                    expected: d - 1,
                    found: multiplicities[inf],
                });
            }
            let finite: u32 = order
                .iter()
                .filter(|p| !p.is_infinity())
                .map(|p| p.multiplicity)
                .sum();
            if finite != d - 1 {
                return Err(Error::MultiplicitySum {
                    expected: d - 1,
                    found: finite,
                });
            }
        } else {
            let total: u32 = multiplicities.iter().sum();
            if total != 2 * d - 2 {
                return Err(Error::MultiplicitySum {
                    expected: 2 * d - 2,
                    found: total,
                });
            }
        }

        let mut all_critical_periodic = true;
        for (i, &m) in multiplicities.iter().enumerate() {
            if m > 0 && orbit_shape(&image, i).0 != 0 {
                all_critical_periodic = false;
            }
        }

        let (mu, nu) = match invert(&image) {
            Some(nu) => (Some(image.clone()), Some(nu)),
            None => (None, None),
        };

        Ok(ValidationReport {
            degree: d,
            n: order.len() as i64 - 3,
            polynomial: self.polynomial_flag,
            all_critical_periodic,
            is_permutation: mu.is_some(),
            ordering: order.iter().map(|p| p.label.clone()).collect(),
            multiplicities,
            mu,
            nu,
        })
    }

    /// `(tail_length, cycle_length)` of the forward orbit of `label`.
    pub fn orbit_of(&self, label: &str) -> Result<(usize, usize)> {
        let image = self.image_indices()?;
        Ok(orbit_shape(&image, self.index_of(label)?))
    }

    /// The permutation `μ` with `p_{μ(k)} = f(p_k)` and its inverse `ν`.
    pub fn mu_nu(&self) -> Result<(Vec<usize>, Vec<usize>)> {
        let image = self.image_indices()?;
        let nu = invert(&image).ok_or(Error::NotPermutation)?;
        Ok((image, nu))
    }
}

/// Tail and cycle length of the orbit of `start` under the index map.
pub fn orbit_shape(image: &[usize], start: usize) -> (usize, usize) {
    let mut first_seen = vec![usize::MAX; image.len()];
    let mut k = start;
    let mut step = 0;
    while first_seen[k] == usize::MAX {
        first_seen[k] = step;
        k = image[k];
        step += 1;
    }
    (first_seen[k], step - first_seen[k])
}

fn invert(image: &[usize]) -> Option<Vec<usize>> {
    let mut inv = vec![usize::MAX; image.len()];
    for (i, &j) in image.iter().enumerate() {
        if inv[j] != usize::MAX {
            return None;
        }
        inv[j] = i;
    }
    Some(inv)
}

impl ValidationReport {
    /// Human-readable lines for reports.
    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("degree={}", self.degree),
            format!("n={}", self.n),
            format!("ordering={}", self.ordering.join(",")),
            format!("polynomial={}", self.polynomial),
            format!("all_critical_periodic={}", self.all_critical_periodic),
            format!("is_permutation={}", self.is_permutation),
        ];
        if let (Some(mu), Some(nu)) = (&self.mu, &self.nu) {
            out.push(format!("mu={}", join_indices(mu)));
            out.push(format!("nu={}", join_indices(nu)));
        }
        out
    }
}

fn join_indices(v: &[usize]) -> String {
    v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

/// Portraits used throughout the tests and the CLI examples.
pub mod examples {
    use super::*;

    /// Period-3 quadratic portrait (rabbit, corabbit and airplane).
    pub fn rabbit() -> RamificationPortrait {
        RamificationPortrait::new(
            2,
            true,
            vec![
                MarkedPoint::new("p0", "p1", 1),
                MarkedPoint::new("p1", "p2", 0),
                MarkedPoint::new("p2", "p0", 0),
            ],
        )
    }

    /// Quadratic portrait with a critical cycle of the given period.
    pub fn quadratic_period(period: usize) -> RamificationPortrait {
        let points = (0..period)
            .map(|k| {
                MarkedPoint::new(
                    &format!("p{k}"),
                    &format!("p{}", (k + 1) % period),
                    u32::from(k == 0),
                )
            })
            .collect();
        RamificationPortrait::new(2, true, points)
    }

    /// Cubic with two fixed simple critical points and one further fixed
    /// marked point.
    pub fn cubic_fixed_critical() -> RamificationPortrait {
        RamificationPortrait::new(
            3,
            true,
            vec![
                MarkedPoint::new("c0", "c0", 1),
                MarkedPoint::new("c1", "c1", 1),
                MarkedPoint::new("q", "q", 0),
            ],
        )
    }

    /// The degree-3 rational map `3z²/(2z³+1)`: 0 and 1 fixed, ω ↔ ω̄.
    pub fn cubic_galois() -> RamificationPortrait {
        RamificationPortrait::new(
            3,
            false,
            vec![
                MarkedPoint::new("0", "0", 1),
                MarkedPoint::new("1", "1", 1),
                MarkedPoint::new("w", "wbar", 1),
                MarkedPoint::new("wbar", "w", 1),
            ],
        )
    }

    /// The quartic `2i(z² − (1+i)/2)²`.
    pub fn quartic() -> RamificationPortrait {
        RamificationPortrait::new(
            4,
            true,
            vec![
                MarkedPoint::new("r+", "0", 1),
                MarkedPoint::new("r-", "0", 1),
                MarkedPoint::new("0", "-1", 1),
                MarkedPoint::new("-1", "1", 0),
                MarkedPoint::new("1", "1", 0),
            ],
        )
    }

    /// The sextic `z²(3 − z⁴)/2`.
    pub fn sextic() -> RamificationPortrait {
        RamificationPortrait::new(
            6,
            true,
            vec![
                MarkedPoint::new("i", "-1", 1),
                MarkedPoint::new("-i", "-1", 1),
                MarkedPoint::new("-1", "1", 1),
                MarkedPoint::new("1", "1", 1),
                MarkedPoint::new("0", "0", 1),
            ],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::examples::*;
    use super::*;

    #[test]
    fn rabbit_validates() {
        let r = rabbit().validate().unwrap();
        assert_eq!(r.n, 1);
        assert!(r.all_critical_periodic && r.is_permutation && r.polynomial);
        assert_eq!(r.ordering, vec!["p0", "p1", "p2", "inf"]);
    }

    #[test]
    fn cubic_galois_portrait() {
        let r = cubic_galois().validate().unwrap();
        assert!(!r.polynomial);
        assert!(r.all_critical_periodic);
        assert_eq!(r.n, 1);
        let (mu, nu) = cubic_galois().mu_nu().unwrap();
        assert_eq!(mu[2], 3);
        assert_eq!(mu[3], 2);
        assert_eq!(mu, nu);
    }

    #[test]
    fn quartic_is_not_all_periodic() {
        let p = quartic();
        let r = p.validate().unwrap();
        assert!(!r.all_critical_periodic);
        assert!(!r.is_permutation);
        assert!(r.mu.is_none());
        assert_eq!(p.orbit_of("0").unwrap(), (2, 1));
        assert_eq!(p.orbit_of("inf").unwrap(), (0, 1));
        assert!(matches!(p.mu_nu(), Err(Error::NotPermutation)));
    }

    #[test]
    fn orbit_and_permutation() {
        let p = rabbit();
        assert_eq!(p.orbit_of("p0").unwrap(), (0, 3));
        let (mu, nu) = p.mu_nu().unwrap();
        assert_eq!(&mu[..3], &[1, 2, 0]);
        assert_eq!(&nu[..3], &[2, 0, 1]);
        for k in 0..mu.len() {
            assert_eq!(nu[mu[k]], k);
        }
        let fixed = cubic_fixed_critical();
        let (mu, nu) = fixed.mu_nu().unwrap();
        assert_eq!(mu, vec![0, 1, 2, 3]);
        assert_eq!(mu, nu);
        assert!(matches!(p.orbit_of("zz"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn error_paths() {
        let dangling = RamificationPortrait::new(2, true, vec![MarkedPoint::new("a", "b", 1)]);
        assert!(matches!(dangling.validate(), Err(Error::DanglingLabel { .. })));

        let sum = RamificationPortrait::new(
            3,
            true,
            vec![MarkedPoint::new("a", "a", 1), MarkedPoint::new("b", "b", 0)],
        );
        assert!(matches!(sum.validate(), Err(Error::MultiplicitySum { expected: 2, found: 1 })));

        let low = RamificationPortrait::new(1, true, vec![MarkedPoint::new("a", "a", 0)]);
        assert!(matches!(low.validate(), Err(Error::DegreeTooSmall(1))));

        let dup = RamificationPortrait::new(
            2,
            true,
            vec![MarkedPoint::new("a", "a", 1), MarkedPoint::new("a", "a", 0)],
        );
        assert!(matches!(dup.validate(), Err(Error::DuplicateLabel(_))));
    }

    #[test]
    fn toml_round_trip_and_strictness() {
        let text = r#"
degree = 2
polynomial = true

[[points]]
label = "p0"
image = "p1"
multiplicity = 1

[[points]]
label = "p1"
image = "p2"

[[points]]
label = "p2"
image = "p0"
"#;
        let p = RamificationPortrait::from_toml_str(text).unwrap();
        assert_eq!(p, rabbit());
        let again = RamificationPortrait::from_toml_str(&p.to_toml_string()).unwrap();
        assert_eq!(again, p);

        let unknown = format!("{text}\nextra = 1\n");
        assert!(RamificationPortrait::from_toml_str(&unknown).is_err());
        let unknown_point = text.replace("multiplicity = 1", "multiplicity = 1\ncolour = 3");
        assert!(RamificationPortrait::from_toml_str(&unknown_point).is_err());
    }

    #[test]
    fn validate_is_pure() {
        let p = quadratic_period(4);
        assert_eq!(p.validate().unwrap(), p.validate().unwrap());
    }
}
