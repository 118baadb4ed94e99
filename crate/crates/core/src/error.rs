use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("unsupported metric: {0}")]
    UnsupportedMetric(String),

    #[error("insufficient scales: {usable} usable, at least {required} required")]
    InsufficientScales { usable: usize, required: usize },

    /// Carries the full per-alpha diagnostics so callers can inspect why no
    /// slope landed in the valid band.
    #[error("estimation failed: {message}")]
    EstimationFailed {
        message: String,
        diagnostics: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
