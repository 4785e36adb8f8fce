//! Orbit tangency statistics for three-reflection Schottky groups on the
//! Poincaré disk.
//!
//! The group is generated by inversions in three circles orthogonal to the
//! unit circle, one per boundary arc. A small circle tangent to the
//! boundary at angle 0 is pushed around by the group; each reduced word
//! yields another tangent circle, and the curvature of that circle is the
//! squared norm of the word. This crate provides:
//!
//! - exact-pruned enumeration of all tangencies below a curvature-norm
//!   threshold ([`orbit`]),
//! - gap statistics at the `T²` scale and two estimators for the critical
//!   exponent δ — orbit-count slopes and the transfer-operator eigenvalue
//!   ([`gaps`]),
//! - numerical audits of the structural facts the statistics rest on:
//!   one-step curvature growth, norm equivalence, extension bounds,
//!   palindrome tails, tail classification of words, neighbor geometry,
//!   and the rotation–boost factorization of disk maps ([`audit`]),
//! - the limiting point process: sampling from the normalized tangency
//!   measure, one-sided nearest-neighbor laws at the `N^{−1/δ}` scale,
//!   avoidance-function comparisons, and exact combinatorial bracket
//!   checks ([`process`]),
//! - a text config format, deterministic CSV/JSON/SVG output, and a CLI
//!   ([`runconfig`], [`output`]).
//!
//! All randomized procedures take an explicit seed and stream index;
//! parallel and serial enumeration produce byte-identical output.

// `!(x > 0.0)` is used deliberately in validation guards: unlike
// `x <= 0.0` it also rejects NaN, which is exactly what they must do.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod config;
pub mod error;
pub mod gaps;
pub mod geom;
pub mod orbit;
pub mod output;
pub mod process;
pub mod runconfig;

pub use config::{BoundaryArc, GroupConfig};
pub use error::{Error, Result};
pub use gaps::{estimate_delta_counting, estimate_delta_eigenvalue, gap_cdf, gap_table};
pub use geom::{ReflectionCircle, TangentCircle};
pub use orbit::{enumerate_orbit, enumerate_orbit_serial, AngularInterval, OrbitPoint};
pub use runconfig::RunConfig;
