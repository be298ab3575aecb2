use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for {len} sites")]
    OutOfRange { index: usize, len: usize },

    #[error("{what} needs {n} qubits, above the dense limit of {limit}")]
    DenseLimit { what: &'static str, n: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("observable is not Hermitian")]
    NonHermitian,

    #[error("process is not CPTP: {0}")]
    NotCptp(String),

    #[error("matrix is singular (condition number {condition:e})")]
    Singular { condition: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("expansion exceeded the term cap of {cap} ({count} terms so far)")]
    TermCapExceeded { cap: usize, count: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
