//! Crate-wide error type.
//!
//! Variants map onto the CLI exit-code contract: configuration/model problems
//! exit with 2, numerical failures with 3, verification failures with 1.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A model, potential, or schedule was constructed with invalid data
    /// (bad parameters, violated preconditions, malformed specs).
    #[error("model error: {0}")]
    Model(String),

    /// A numerical routine failed to deliver its accuracy contract
    /// (non-convergent quadrature, divergent series, non-finite values).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A sampler failed its diagnostics (acceptance-rate window, effective
    /// sample size floor).
    #[error("sampling error: {0}")]
    Sampling(String),

    /// Malformed configuration or serialized input.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub fn sampling(msg: impl Into<String>) -> Self {
        Error::Sampling(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Exit code for the CLI: 2 for model/config problems, 3 for numeric and
    /// sampling failures, 1 reserved for verification failures (not an error).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Model(_) | Error::Config(_) | Error::Io(_) | Error::Json(_) => 2,
            Error::Numeric(_) | Error::Sampling(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
