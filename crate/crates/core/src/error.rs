use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Quadrature or iteration stopped before reaching the requested accuracy.
    #[error("accuracy not reached: {what} (estimated error {estimate:e})")]
    Accuracy { what: String, estimate: f64 },

    #[error("integration failed at s = {s}: {reason}")]
    Integration { s: f64, reason: String },

    #[error("numerical breakdown at s = {s}: {reason}")]
    Breakdown { s: f64, reason: String },

    #[error("branch failed: {failed} of {total} points could not be solved (first failures at rho0 = {sample:?})")]
    Branch {
        failed: usize,
        total: usize,
        sample: Vec<f64>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
