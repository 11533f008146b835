//! Rough path lift of quadratic Weyl sums.
//!
//! - [`weyl`]: theta sums, the interpolated path and all window sums in `O(N)`.
//! - [`roughpath`]: level-2 rough paths, Chen and geometricity checks, Holder
//!   seminorms and the truncated tensor algebra.
//! - [`roughcalc`]: Young and rough integrals, a Davie-step RDE solver.
//! - [`jacobi`]: the universal Jacobi group, theta functions and reduction to
//!   the fundamental domain.
//! - [`triangle`]: the dyadic decomposition of the triangle indicator.
//! - [`harness`]: deterministic Monte Carlo estimators.

// `!(a < b)` checks double as NaN rejection
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod jacobi;
pub mod phase;
pub mod quad;
pub mod roughcalc;
pub mod roughpath;
pub mod triangle;
pub mod weyl;

pub use error::{Error, Result};

/// Locale-independent formatting with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
