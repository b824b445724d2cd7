use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: {context} (expected {expected}, got {actual})")]
    Shape {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("insufficient data: need {needed} trajectories, pool holds {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("MPC solver diverged: {0}")]
    SolverDiverged(String),

    #[error("checkpoint manifest mismatch: {0}")]
    Manifest(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
