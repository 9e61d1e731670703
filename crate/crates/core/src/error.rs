use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("width undefined: {0}")]
    WidthUndefined(String),

    #[error("ambiguous peak: {0} samples share the maximum value")]
    AmbiguousPeak(usize),

    #[error("extremum of order {order} not found near {frequency_hz} Hz")]
    ExtremaNotFound { order: u32, frequency_hz: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("fit initialization failed: {0}")]
    Initialization(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
