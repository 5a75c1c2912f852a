use std::fmt;

use thiserror::Error;

use crate::reduction::VerificationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("wrong constructor: {0}")]
    WrongConstructor(String),

    #[error("site index {index} out of range (tree has {len} sites)")]
    IndexOutOfRange { index: u64, len: u64 },

    #[error("matrix is not symmetric: max |A - A^T| = {0:e}")]
    NotSymmetric(f64),

    #[error("eigensolver did not converge for eigenvalue {index} (matrix {size}x{size}, fingerprint {fingerprint:016x})")]
    NoConvergence {
        index: usize,
        size: usize,
        fingerprint: u64,
    },

    #[error("{}", .0.failure_summary())]
    Verification(Box<VerificationReport>),

    #[error("time grid is empty")]
    EmptyGrid,

    #[error("no qualifying peak up to t = {horizon} (max probability seen {max_prob:e})")]
    NoPeak { horizon: f64, max_prob: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag, used by the CLI error object.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::WrongConstructor(_) => "wrong-constructor",
            Error::IndexOutOfRange { .. } => "index-out-of-range",
            Error::NotSymmetric(_) => "not-symmetric",
            Error::NoConvergence { .. } => "numerical-failure",
            Error::Verification(_) => "verification-failed",
            Error::EmptyGrid => "empty-grid",
            Error::NoPeak { .. } => "no-peak-found",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub(crate) fn invalid(msg: impl fmt::Display) -> Error {
    Error::InvalidParameter(msg.to_string())
}
