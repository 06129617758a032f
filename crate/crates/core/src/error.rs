use thiserror::Error;

/// Errors raised by the numerical routines and the CLI plumbing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model parameter violates its invariant.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An evaluation could not reach the requested tolerance.
    #[error("accuracy error: {what} (achieved {achieved:.3e})")]
    Accuracy { what: String, achieved: f64 },

    /// A time-stepping solve produced a non-finite value before any blow-up was detected.
    #[error("numerical failure after node {last_good} (t = {t}): {what}")]
    NumericalFailure { what: String, last_good: usize, t: f64 },

    /// Inputs that make a formula degenerate (zero denominators, zero rates).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Malformed configuration text.
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
