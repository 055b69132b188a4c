use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} limited to {limit}, got {value}")]
    Guard {
        what: &'static str,
        limit: u64,
        value: u64,
    },

    #[error("{routine} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        routine: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("unknown method `{0}`")]
    UnknownMethod(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Guard { .. } | Error::UnknownMethod(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
