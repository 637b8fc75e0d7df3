use thiserror::Error;

#[derive(Debug, Error)]
pub enum KpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("configurations differ in point count ({left} vs {right})")]
    CountMismatch { left: usize, right: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("body is empty")]
    EmptyBody,

    #[error("could not place {wanted} points at separation {separation} after {attempts} attempts")]
    PlacementFailed {
        wanted: usize,
        separation: f64,
        attempts: usize,
    },

    #[error("method {method} unavailable for d={d}, k={k}")]
    MethodUnavailable { method: String, d: usize, k: usize },

    #[error("self-test failed: {0}")]
    SelfTestFailed(String),

    #[error("bound gap {gap:e} exceeds tolerance {tol:e}")]
    Uncertified { gap: f64, tol: f64 },

    #[error("unsupported schema version {0:?}")]
    SchemaVersion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = KpError> = std::result::Result<T, E>;
