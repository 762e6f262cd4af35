use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("manifest: alignment references utterance {0:?} which has no feature entry")]
    DanglingUtterance(String),

    #[error("dimension mismatch for {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("npy: {0}")]
    Npy(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("vocab line {line}: {message}")]
    Vocab { line: usize, message: String },

    #[error("alignment line {line}: {message}")]
    Alignment { line: usize, message: String },

    #[error("alignment line {line}: unknown phoneme label {label:?}")]
    UnknownLabel { line: usize, label: String },

    #[error("utterance {utterance:?}: tokens overlap at {onset_s}s")]
    OverlappingTokens { utterance: String, onset_s: f64 },

    #[error("wav: {0}")]
    Wav(String),

    #[error("covariates line {line}: {message}")]
    Covariates { line: usize, message: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("empty sample set: {0}")]
    EmptySamples(String),

    #[error("{0}")]
    Numeric(String),

    #[error("synthetic spec: {0}")]
    Synth(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
