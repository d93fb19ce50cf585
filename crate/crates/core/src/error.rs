use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole at {0}")]
    Pole(String),
    #[error("invalid weight spec: {0}")]
    InvalidSpec(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("no convergence after {iterations} iterations: {what}")]
    NonConvergence { what: String, iterations: usize },
    #[error("tolerance {requested:e} not met (estimate {achieved:e}): {what}")]
    Tolerance {
        what: String,
        requested: f64,
        achieved: f64,
    },
    #[error("budget exceeded: {what} (cap {cap})")]
    Budget { what: String, cap: usize },
    #[error("repeated root: {0}")]
    Multiplicity(String),
}

impl Error {
    /// True for failures caused by a numeric budget (iteration, member or
    /// term caps) rather than by bad input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::Tolerance { .. } | Error::Budget { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
