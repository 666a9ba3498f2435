//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad argument or precondition violation supplied by the caller.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Bad or missing configuration value; the message names the field.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed input data; names the offending row and column.
    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    /// Input on which the requested statistic is undefined.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("network generation failed: {0}")]
    Network(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config file error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code contract: 2 for usage/config errors, 1 for runtime errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::Config(_)
            | Error::Parse { .. }
            | Error::Toml(_) => 2,
            _ => 1,
        }
    }
}
