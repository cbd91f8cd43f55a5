use thiserror::Error;

use crate::solver::SolveReport;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("cochain belongs to a different complex")]
    ComplexMismatch,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("operation requires dimension {expected}, complex has dimension {found}")]
    WrongDimension { expected: usize, found: usize },

    #[error("solver did not converge: {0}")]
    NotConverged(SolveReport),

    #[error("inconsistent right-hand side: {0}")]
    Inconsistent(SolveReport),

    #[error("dense eigensolver cap exceeded: {size} unknowns > cap {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("spectral gap too small around kernel threshold: accepted {accepted:e}, rejected {rejected:e}")]
    SpectralGap { accepted: f64, rejected: f64 },

    #[error("invalid hypersurface: {0}")]
    InvalidHypersurface(String),

    #[error("gluing failed: {0}")]
    Gluing(String),

    #[error("trace mismatch across interface: {0}")]
    TraceMismatch(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
