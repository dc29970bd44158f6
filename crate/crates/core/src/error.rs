use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: expected {expected} samples, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("no shooting bracket found for b in [{lo}, {hi}]")]
    BracketNotFound { lo: f64, hi: f64 },

    #[error("integrand does not decay: tail {tail:e} vs truncated {truncated:e}")]
    NonDecaying { tail: f64, truncated: f64 },

    #[error("numerical fault: {0}")]
    Numeric(String),

    #[error("malformed cache file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
