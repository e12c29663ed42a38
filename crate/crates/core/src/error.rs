use thiserror::Error;

/// Failures reported by the numerical modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("under-resolved grid: step {step} exceeds {limit} ({what})")]
    UnderResolved { step: f64, limit: f64, what: &'static str },

    #[error("basis too narrow: {reason}")]
    BasisTooNarrow { reason: String },

    #[error("invariant `{invariant}` violated: {detail}")]
    Invariant { invariant: &'static str, detail: String },

    #[error("eigensolver did not converge ({0})")]
    Eigensolver(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
