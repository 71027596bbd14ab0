use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed PNM header at byte {offset}: {reason}")]
    Parse { offset: usize, reason: String },

    #[error("PNM payload truncated: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("unsupported image format: {0}")]
    Format(String),

    #[error("invalid specification: {0}")]
    Spec(String),

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("non-finite level set value after iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Error::Spec(msg.into())
    }
}
