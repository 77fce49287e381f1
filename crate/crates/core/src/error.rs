use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("numeric failure in {context}: {reason}")]
    Numeric { context: &'static str, reason: String },

    #[error("root find did not converge on [{lo}, {hi}] after {iterations} iterations")]
    RootNotBracketed { lo: f64, hi: f64, iterations: usize },

    #[error("quadrature did not converge on [{lo}, {hi}] (estimated error {error:e})")]
    Quadrature { lo: f64, hi: f64, error: f64 },

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownStrategy { kind: &'static str, name: String, known: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub fn numeric(context: &'static str, reason: impl Into<String>) -> Self {
        Error::Numeric { context, reason: reason.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by bad user input rather than a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::Config(_)
                | Error::Json(_)
                | Error::UnknownStrategy { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
