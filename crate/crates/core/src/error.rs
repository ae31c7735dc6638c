use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected dim={expected}, got dim={got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite coordinate at point {index}")]
    NonFinite { index: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("approximation factor undefined: size {size} <= d*k = {dk}")]
    Pole { size: u64, dk: u64 },

    #[error("csv row {row}: {message}")]
    Csv { row: usize, message: String },

    #[error("validation pool too small: need {needed} points, have {available}")]
    ValidationExhausted { needed: usize, available: usize },

    #[error("sweep grid needs {needed} points but only {available} are available")]
    GridExceedsData { needed: usize, available: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
