//! Numerical toolkit for Fourier extension estimates on polynomial curves
//! with affine arclength measure.
//!
//! The crate is organized around a handful of concrete objects: polynomial
//! curves and their torsion frames (`curves`), quadrature profiles and the
//! extension operator (`extension`), the cross-interaction functional and
//! drifting wave packets (`interaction`), two-bump trial families and their
//! scale scans (`trials`), direct ascent on the Rayleigh quotient
//! (`extremize`), and the combinatorial decompositions used to localize mass
//! (`decompose`).

pub mod curves;
pub mod decompose;
pub mod error;
pub mod extension;
pub mod extremize;
pub mod interaction;
pub mod poly;
pub mod trials;

pub use error::{Error, Result};
