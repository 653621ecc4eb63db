use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported or unrecognized format: {0}")]
    Format(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("solver did not converge after {iterations} iterations (KKT gap {gap:.3e})")]
    Convergence { iterations: usize, gap: f64 },
    #[error("correlation undefined: zero variance (rmse = {rmse})")]
    UndefinedCorrelation { rmse: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the caller's inputs rather than by the toolkit.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Convergence { .. })
    }
}
