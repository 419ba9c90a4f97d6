use std::io;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("thresholds undefined: eps = {eps} exceeds 1/8 (mu1/mu2 need 1 - 8 eps >= 0)")]
    ThresholdsUndefined { eps: f64 },

    #[error("index {index} out of range for {axis} of length {len}")]
    IndexOutOfRange {
        axis: &'static str,
        index: usize,
        len: usize,
    },

    #[error("degenerate pivot at ({row}, {col}): value is zero")]
    DegeneratePivot { row: usize, col: usize },

    #[error("bound is vacuous: {0}")]
    Vacuous(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("special function did not converge: {0}")]
    NoConvergence(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
