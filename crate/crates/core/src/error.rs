use std::io;

use thiserror::Error;

/// Errors raised by the solver and its drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {point:?} lies outside cell {cell}")]
    PointOutsideCell { cell: usize, point: [f64; 3] },

    #[error("non-finite value {what}: {detail}")]
    NonFinite { what: String, detail: String },

    #[error("time step must be positive, got {0}")]
    InvalidTimeStep(f64),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("non-positive signal value {value} at t = {t}")]
    NonPositiveSignal { t: f64, value: f64 },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
