use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("invalid k-set instance: {0}")]
    InvalidInstance(String),

    #[error("invalid packing: {0}")]
    InvalidPacking(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("instance too large for exhaustive search: {actual} > {limit}")]
    InstanceTooLarge { limit: usize, actual: usize },

    #[error("path length bound must be odd and >= 1, got {0}")]
    InvalidLength(usize),

    #[error("operation requires a {expected} model")]
    WrongModelVariant { expected: &'static str },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("selector rejected in round {round}: {reason}")]
    SelectorRejected { round: usize, reason: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
