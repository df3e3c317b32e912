//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Vector or matrix lengths do not agree.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A computation produced a non-finite value. The message carries
    /// run/iteration/node context when raised inside the harness.
    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// A randomized construction exhausted its retry budget.
    #[error("construction failure: {0}")]
    ConstructionFailure(String),

    /// A configuration file failed to parse or contained invalid values.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
