use thiserror::Error;

/// Errors raised by model construction, estimation and experiment plumbing.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: String,
        expected: String,
        got: String,
    },

    /// Non-finite values or a factorization that failed.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("unsupported conversion: {0}")]
    UnsupportedConversion(String),

    /// A configuration value violates an invariant; `field` names the offender.
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(what: impl Into<String>, expected: impl ToString, got: impl ToString) -> Self {
        Error::Dimension {
            what: what.into(),
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
