use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("unknown configuration `{0}`")]
    UnknownCase(String),

    #[error("invalid marked set: {0}")]
    InvalidMarked(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error(
        "dimension {dimension} exceeds the dense eigensolver cap of {cap}; \
         evolve in the reduced (equitable partition) subspace instead"
    )]
    DimensionCap { dimension: usize, cap: usize },

    #[error("step size {dt} too large for the integrator; use dt <= {suggested}")]
    StepTooLarge { dt: f64, suggested: f64 },

    #[error("partition is not equitable: {0}")]
    NotEquitable(String),

    #[error("appendix mismatch for {case}: {detail}")]
    AppendixMismatch { case: String, detail: String },

    #[error("ambiguous eigenpair selection: combined overlap {0:.3} < 0.5")]
    AmbiguousSelection(f64),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
