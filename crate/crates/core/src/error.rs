use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Mismatched lengths or levels.
    #[error("shape error: {0}")]
    Shape(String),
    /// Invalid configuration (law parameters, experiment settings, files).
    #[error("configuration error: {0}")]
    Config(String),
    /// Numeric failure during a computation (e.g. nonpositive values fed to a log fit).
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
