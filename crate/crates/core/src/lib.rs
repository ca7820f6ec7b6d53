//! Numerical toolkit for Thurston pullback maps of postcritically finite
//! polynomials and rational maps.
//!
//! The crate is organised bottom-up:
//!
//! * [`sphere`], [`poly`], [`roots`], [`rational`]: complex polynomial and
//!   rational-map kernel on the Riemann sphere.
//! * [`portrait`]: ramification portraits, the combinatorial input.
//! * [`moduli`]: the homogeneous endomorphism `G_f` of moduli space and its
//!   Jacobian identity.
//! * [`dynamics`]: forward orbit closure and numeric portrait extraction.
//! * [`solver`]: Newton search for fixed points of `G_f`, polynomial
//!   recovery, PCF certification and inverse-branch iteration.
//! * [`cubic`]: the one-parameter cubic family through `3z²/(2z³+1)`.
//! * [`constsigma`]: decomposition certificates `f = g∘s`.
//! * [`render`]: basin-of-attraction images.

pub mod constsigma;
pub mod cubic;
pub mod dynamics;
mod error;
mod linalg;
pub mod moduli;
pub mod poly;
pub mod portrait;
pub mod rational;
pub mod render;
pub mod roots;
pub mod solver;
pub mod sphere;

pub use error::{Error, Result};
pub use moduli::{GfMap, ModuliVector};
pub use poly::ComplexPoly;
pub use portrait::{MarkedPoint, RamificationPortrait, ValidationReport};
pub use rational::{MapSpec, RationalMap};
pub use sphere::Point;

pub use num_complex::Complex64;
