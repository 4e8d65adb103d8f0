use std::path::PathBuf;

use muskat_core::MuskatError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("calibration: {0}")]
    Calibration(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] MuskatError),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
