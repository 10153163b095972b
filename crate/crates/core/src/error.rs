//! Error type shared by every module of the crate.

use std::io;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    /// Malformed file content. `position` names the byte offset (binary
    /// formats) or the `line:column` cell (CSV).
    #[error("parse error at {position}: {message}")]
    Parse { position: String, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("kernel extent {kernel} exceeds signal extent {signal} on axis {axis} under periodic boundary")]
    KernelTooLarge {
        axis: usize,
        kernel: usize,
        signal: usize,
    },

    /// The signal has no extrema along any axis, so no filter support can be
    /// derived from it. Callers treat the signal as a trend.
    #[error("trend signal: no support estimable")]
    TrendSignal,

    #[error("Fokker-Planck solver did not converge after {steps} steps (residual {residual:e})")]
    NonConvergence { steps: usize, residual: f64 },

    #[error("covariance matrix is singular; use a positive ridge")]
    SingularCovariance,

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
}

impl Error {
    pub(crate) fn parse(position: impl ToString, message: impl Into<String>) -> Self {
        Error::Parse {
            position: position.to_string(),
            message: message.into(),
        }
    }

    /// True for failures of the numerics themselves, as opposed to bad
    /// input or I/O.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::SingularCovariance
                | Error::NotPositiveDefinite { .. }
        )
    }
}
