use thiserror::Error;

/// Errors produced anywhere in the crate.
///
/// `kind()` gives a stable machine-readable tag used by the command-line
/// front end when it refuses a request.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("engine violation: {0}")]
    EngineViolation(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("strict turnstile violation at update {position}: coordinate {index} would become {value}")]
    StrictViolation { position: usize, index: usize, value: i64 },
    #[error("protocol inconsistency: {0}")]
    Inconsistent(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::EngineViolation(_) => "engine-violation",
            Error::Refused(_) => "refused",
            Error::Precondition(_) => "precondition",
            Error::Parameter(_) => "parameter",
            Error::StrictViolation { .. } => "strict-violation",
            Error::Inconsistent(_) => "inconsistent",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
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
