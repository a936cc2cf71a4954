use thiserror::Error;

/// Failure modes shared by every module of the toolkit.
///
/// The variants are coarse on purpose: front ends map each one to a distinct
/// exit status, so a variant must never be reused for a different class of
/// failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input: non-hermitian matrices, bad dimensions, bad parameters.
    #[error("validation error: {0}")]
    Validation(String),
    /// Syntax error in the field grammar.
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    /// An index or order outside the mathematically meaningful range.
    #[error("domain error: {0}")]
    Domain(String),
    /// A field evaluated outside its domain (log of a nonpositive value, ...).
    #[error("evaluation error in `{subexpression}`: {reason}")]
    Evaluation { subexpression: String, reason: String },
    /// A structural hypothesis of an operation does not hold on the data.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Quadrature produced non-finite samples, failed to converge, or the
    /// integrand does not decay fast enough for the grid.
    #[error("integration error: {0}")]
    Integration(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn integration(msg: impl Into<String>) -> Self {
        Error::Integration(msg.into())
    }
}
