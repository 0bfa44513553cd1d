use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("cannot parse cell at row {row}, column {col}: {value:?}")]
    Parse { row: usize, col: usize, value: String },

    #[error("non-finite value at row {row}, column {col}: {value:?}")]
    NonFinite { row: usize, col: usize, value: String },

    #[error("ragged input: row {row} has {found} fields, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid labels: {0}")]
    InvalidLabels(String),

    #[error("zero vector(s) at rows {rows:?}; metric {metric} needs nonzero rows")]
    ZeroVector { metric: String, rows: Vec<usize> },

    #[error("metric {metric} is incompatible with {coordinates} coordinates")]
    CoordinateMismatch { metric: String, coordinates: String },

    #[error("invalid distance matrix: {0}")]
    InvalidDistanceMatrix(String),

    #[error("reference point coincides with a data point (minimum distance 0)")]
    ZeroMinDistance,

    #[error("sample too small: need at least {needed}, got {got}")]
    SampleTooSmall { needed: usize, got: usize },

    #[error("invalid mixture model: {0}")]
    InvalidModel(String),

    #[error("goodness-of-fit test needs at least 2 bins after merging, got {0}")]
    TooFewBins(usize),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("session state: {0}")]
    Session(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
