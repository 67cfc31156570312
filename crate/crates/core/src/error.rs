use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant onto a process exit
/// code through [`Error::exit_code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("basis `{label}` is not orthonormal (max deviation {deviation:.3e})")]
    NotOrthonormal { label: String, deviation: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("measure `{measure}` is undefined on this input: {reason}")]
    Undefined { measure: &'static str, reason: &'static str },

    #[error("enumeration too large: {0}")]
    TooComplex(String),

    #[error("wrong number of measurements: {0}")]
    Arity(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// 2 for malformed input, 3 for semantic violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_)
            | Error::Io(_)
            | Error::UnknownName(_)
            | Error::NotOrthonormal { .. }
            | Error::InvalidState(_)
            | Error::InvalidDistribution(_)
            | Error::EmptyInput(_)
            | Error::Undefined { .. } => 2,
            Error::InvalidMatrix(_)
            | Error::DimensionMismatch { .. }
            | Error::IndexOutOfRange { .. }
            | Error::TooComplex(_)
            | Error::Arity(_) => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
