use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("score cache miss for child {child} with parents {parents:?}")]
    CacheMiss { child: usize, parents: Vec<usize> },

    #[error("cycle detected in graph")]
    CycleDetected,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Usage/validation errors map to exit code 2, internal errors to 1.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::CacheMiss { .. } | Error::CycleDetected)
    }
}
