use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("yaml error at line {line}, column {column}: {message}")]
    Yaml {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("multiple documents unsupported")]
    MultipleDocuments,

    #[error("empty document")]
    EmptyDocument,

    #[error("duplicate key `{key}` at line {line}, column {column}")]
    DuplicateKey {
        key: String,
        line: usize,
        column: usize,
    },

    #[error("empty workflow")]
    EmptyWorkflow,

    #[error("catalog error: {0}")]
    Catalog(String),

    #[error("invalid construct `{0}`")]
    InvalidConstruct(String),

    #[error("invalid path `{0}`")]
    InvalidPath(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("risk model error: {0}")]
    RiskModel(String),

    #[error("{0}")]
    Stats(String),

    #[error("rank-deficient design matrix (rank {rank} < {columns} columns)")]
    RankDeficient { rank: usize, columns: usize },

    #[error("fit did not converge: {0}")]
    NotConverged(String),

    #[error("degenerate grouping: {0}")]
    DegenerateGrouping(String),

    #[error("feature `{feature}` is outside the usage band ({rate:.3} not in (0.05, 0.95))")]
    OutsideUsageBand { feature: String, rate: f64 },

    #[error("overlapping history intervals for workflow `{0}`")]
    OverlappingIntervals(String),

    #[error("line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
