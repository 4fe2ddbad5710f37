//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two nodes that need a propagation path sit at the same point.
    #[error("degenerate geometry: zero distance between nodes")]
    DegenerateGeometry,

    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eavesdropper index {index} out of range (k_eves = {count})")]
    EveIndexOutOfRange { index: usize, count: usize },

    /// Phase optimization was requested on a profile with no elements.
    #[error("nothing to optimize: profile has no reflecting elements")]
    NothingToOptimize,

    /// The exhaustive oracle costs levels^m evaluations and is capped at m = 3.
    #[error("oracle restricted to desk scale: m = {m} exceeds 3")]
    OracleTooLarge { m: usize },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("config file: {0}")]
    ConfigParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid_config(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

/// Finite and strictly positive (rejects NaN, which TOML can encode).
pub(crate) fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}
