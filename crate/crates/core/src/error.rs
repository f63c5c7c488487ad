use thiserror::Error;

/// Errors raised by the geometry and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("shape is not star-shaped about the base point: {0}")]
    NotStarShaped(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("finite-difference step {0} is too large (must be in (0, 0.1])")]
    StepTooLarge(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("internal numerical failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
