use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("line {line}: record `{id}` has embedding length {found}, expected {expected}")]
    DimensionMismatch {
        line: usize,
        id: String,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: duplicate chain id `{id}`")]
    DuplicateId { line: usize, id: String },

    #[error("line {line}: unknown role `{token}`")]
    UnknownRole { line: usize, token: String },

    #[error("line {line}: unknown stance `{token}`")]
    UnknownStance { line: usize, token: String },

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("requested {k} clusters but only {n} points are available")]
    TooFewPoints { k: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("unknown character group `{0}`")]
    UnknownGroup(String),

    #[error("empty subset: purity is undefined over zero chains")]
    EmptySubset,

    #[error("model does not match corpus: {0}")]
    ModelMismatch(String),

    #[error("embedding service: {0}")]
    Transport(String),

    #[error("embedding service returned vectors of length {found}, expected {expected}")]
    EmbeddingLength { expected: usize, found: usize },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors caused by bad input rather than a failure while running.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Transport(_) | Error::EmbeddingLength { .. })
    }
}
