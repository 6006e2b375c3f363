use std::path::PathBuf;

/// Errors produced by the library and the command-line front end.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("non-finite value {value:?} at row {row}, column {column} ({attribute})")]
    NonFinite {
        row: usize,
        column: usize,
        attribute: String,
        value: String,
    },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("duplicate attribute name {name:?} at column {column}")]
    DuplicateAttribute { name: String, column: usize },

    #[error("invalid {what}: {message}")]
    InvalidValue { what: &'static str, message: String },

    #[error("k = {k} is out of range: need 1 <= k <= {max}")]
    KOutOfRange { k: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate neighborhood: all neighbors coincide with the query")]
    DegenerateNeighborhood,

    #[error("zero log-moment: every neighbor lies on the threshold, estimate is unbounded")]
    ZeroLogMoment,

    #[error("projection {projection} exceeds threshold {threshold}")]
    ProjectionExceedsThreshold { projection: f64, threshold: f64 },

    #[error("no subspace profile survives min support fraction {rho}; try a smaller value")]
    EmptyProfileSet { rho: f64 },

    #[error("label length mismatch: truth has {truth}, prediction has {pred}")]
    LengthMismatch { truth: usize, pred: usize },

    #[error("unknown {what} {name:?}")]
    Unknown { what: &'static str, name: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidValue {
            what,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
