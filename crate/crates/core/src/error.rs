//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures raised by evaluators, solvers and quadrature routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// The argument is valid mathematically but outside the range this
    /// implementation supports with its stated accuracy.
    #[error("unsupported range in {op}: {detail}")]
    UnsupportedRange { op: &'static str, detail: String },

    /// The result does not fit in an `f64`; a scaled variant is available.
    #[error("overflow in {op}: {detail}")]
    Overflow { op: &'static str, detail: String },

    /// Two gyrogroup elements live in balls of different radii.
    #[error("ball radius mismatch: {left} vs {right}")]
    RadiusMismatch { left: f64, right: f64 },

    /// An iterative method (quadrature, root finder, series) did not reach
    /// its tolerance.
    #[error("{op} did not converge: estimate {estimate:e}, error {error:e}")]
    NonConvergence {
        op: &'static str,
        estimate: f64,
        error: f64,
    },

    /// The spectral round trip used to fix the inversion constant failed.
    #[error("spectral calibration failed: round-trip residual {residual:e} exceeds {tolerance:e}")]
    Calibration { residual: f64, tolerance: f64 },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    /// True for failures of iterative numerics as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::Calibration { .. } | Error::Overflow { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
