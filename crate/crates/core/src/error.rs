use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("curves mix grid and coefficient representations")]
    MixedRepresentation,

    #[error("grid curves need a grid specification")]
    MissingGrid,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value {value} in curve {curve}")]
    NonFinite { curve: usize, value: f64 },

    #[error("malformed CSV {path}: {reason}")]
    MalformedCsv { path: PathBuf, reason: String },

    #[error("no usable rows in {0} (every row had a missing value)")]
    NoUsableRows(PathBuf),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures caused by the input data rather than by how the
    /// library was called.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::MixedRepresentation
                | Error::MissingGrid
                | Error::InvalidGrid(_)
                | Error::NonFinite { .. }
                | Error::MalformedCsv { .. }
                | Error::NoUsableRows(_)
                | Error::Io { .. }
                | Error::Csv(_)
                | Error::Json(_)
        )
    }

    pub fn is_numerical_failure(&self) -> bool {
        matches!(self, Error::NoConvergence { .. })
    }
}
