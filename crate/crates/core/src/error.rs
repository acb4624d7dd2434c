use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::Direction;

pub type Result<T> = std::result::Result<T, RhsError>;

#[derive(Debug, Error)]
pub enum RhsError {
    #[error("index {what} = {index} out of range (limit {limit})")]
    InvalidIndex {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular effective channel (condition number {condition:.3e})")]
    SingularChannel { condition: f64 },

    /// Fewer local maxima than requested; carries what was found.
    #[error("requested {requested} lobes but only {} local maxima exist", found.len())]
    LobeShortfall {
        requested: usize,
        found: Vec<Direction>,
    },

    /// Every trial of an experiment failed.
    #[error("experiment failed: {0}")]
    ExperimentFailed(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl RhsError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        RhsError::InvalidArgument(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        RhsError::DimensionMismatch(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RhsError::Io {
            path: path.into(),
            source,
        }
    }
}
