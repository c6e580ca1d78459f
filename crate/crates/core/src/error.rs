use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum HdfeError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("division by a zero element at index {index}")]
    Division { index: usize },

    #[error("similarity is undefined for a zero vector")]
    UndefinedSimilarity,

    #[error("cannot normalize a zero vector")]
    Normalization,

    #[error("empty superposition: {0}")]
    EmptySuperposition(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    #[error("empty sample set")]
    EmptySamples,

    #[error("wrong codec: {0}")]
    WrongCodec(&'static str),

    #[error("configuration fingerprint mismatch: encoding {encoding:016x}, config {config:016x}")]
    ConfigMismatch { encoding: u64, config: u64 },

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("dataset spec error: {0}")]
    Spec(String),

    #[error("grid resolution {got} is below the minimum {min}")]
    Resolution { got: usize, min: usize },

    #[error("degenerate range: {0}")]
    DegenerateRange(String),

    #[error("malformed encoding at byte {offset}: {reason}")]
    Format { offset: usize, reason: String },

    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error("malformed config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),
}

pub type Result<T> = std::result::Result<T, HdfeError>;

impl HdfeError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        HdfeError::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HdfeError::Io {
            path: path.into(),
            source,
        }
    }
}
