use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("integrity violation: {0}")]
    Integrity(String),

    #[error("eigen solver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NotConverged { sweeps: usize, residual: f64 },

    #[error("layout mismatch: expected {expected} features, got {actual}")]
    LayoutMismatch { expected: usize, actual: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class; the CLI maps these onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Internal,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::Unsupported(_) => ErrorClass::Config,
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::Data(_)
            | Error::InsufficientHistory(_)
            | Error::LayoutMismatch { .. }
            | Error::Io { .. } => ErrorClass::Data,
            Error::Integrity(_) | Error::NotConverged { .. } => ErrorClass::Internal,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
