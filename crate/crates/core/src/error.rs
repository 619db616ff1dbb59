use thiserror::Error;

/// Errors produced by the filtering library and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite data: {0}")]
    NonFinite(String),

    #[error("codebook is empty")]
    EmptyCodebook,

    #[error("kernel value {0:e} between quantized and current input is too small to divide by")]
    SingularKernel(f64),

    #[error("moment matrix is rank deficient at dimension {dimension}")]
    RankDeficient { dimension: usize },

    #[error("all {trials} trials diverged")]
    AllTrialsDiverged { trials: usize },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
