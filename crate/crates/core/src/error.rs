use thiserror::Error;

#[derive(Debug, Error)]
pub enum PinnError {
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("unsupported dimension {dim} (supported up to {max})")]
    UnsupportedDimension { dim: usize, max: usize },

    #[error("empty quadrature rule: {0}")]
    EmptyRule(String),

    #[error("stability violation: {0}")]
    Stability(String),

    #[error("point outside domain: {0}")]
    Domain(String),

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("bound requires i.i.d. random training points: {0}")]
    NotRandom(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, PinnError>;
