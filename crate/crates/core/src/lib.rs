//! Numerical toolkit for fractional Laplacians on three-dimensional
//! hyperbolic space.

// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod geometry;
pub mod gyro;
pub mod kernel;
pub mod numerics;
pub mod operator;
pub mod scale;
pub mod specfun;

pub use error::{Error, Result};
pub use numerics::QuadratureConfig;
