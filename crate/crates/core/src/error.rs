use thiserror::Error;

/// Errors raised by the frame, entropy and certification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("the zero vector has no normalization")]
    ZeroVector,

    #[error("sample list is empty")]
    EmptySamples,

    #[error("sample is not on the unit sphere (norm = {norm})")]
    NotUnit { norm: f64 },

    #[error("basis is not orthonormal (defect = {defect:e})")]
    NotOrthonormal { defect: f64 },

    #[error("frames are incompatible: {0}")]
    MismatchedFrames(String),

    #[error("Renyi order must be positive and different from 1, got {0}")]
    InvalidAlpha(f64),

    #[error("malformed frame file: {0}")]
    Schema(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
