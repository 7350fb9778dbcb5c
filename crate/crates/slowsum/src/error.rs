//! Error type shared by all modules of the crate.

use thiserror::Error;

use crate::hpreal::Real;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An engine configuration is inconsistent or incomplete.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The escalation schedule was exhausted before two successive
    /// configurations agreed to the requested number of digits.
    #[error("convergence failure: last two estimates {previous} and {latest} did not agree")]
    Convergence { previous: Real, latest: Real },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
