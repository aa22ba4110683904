use thiserror::Error;

/// Errors raised by the optimizer library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PgpeError {
    /// An argument lies outside the domain of the operation.
    #[error("{name} = {value} is outside the valid domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A sample set was used for an update before all of its rewards were set.
    #[error("sample rewards have not been evaluated")]
    MissingRewards,

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Invalid experiment configuration; `key` names the offending field.
    #[error("invalid configuration at `{key}`: {message}")]
    Config { key: String, message: String },
}

pub type Result<T> = std::result::Result<T, PgpeError>;

pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> PgpeError {
    PgpeError::Domain {
        name,
        value,
        expected,
    }
}
