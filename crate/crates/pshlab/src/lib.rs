//! Numerical laboratory for the local growth of subharmonic functions.
//!
//! The crate computes relative extremal functions and Siciak extremal
//! functions on desk-scale grid discretizations, estimates logarithmic
//! capacities via Leja points and transfinite diameters, and checks a suite
//! of two-sided growth inequalities over corpora of compact sets and
//! normalized subharmonic test functions.

pub mod envelope;
pub mod error;
pub mod geometry;
pub mod siciak;

pub use error::{Error, Result};
