use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("internal consistency violated: {0}")]
    Inconsistent(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures raised by an iterative or bracketing solve.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::NoSolution(_) | Error::NoConvergence { .. })
    }

    pub(crate) fn context(self, what: &str) -> Self {
        match self {
            Error::Domain(m) => Error::Domain(format!("{what}: {m}")),
            Error::NoSolution(m) => Error::NoSolution(format!("{what}: {m}")),
            Error::InvalidOperator(m) => Error::InvalidOperator(format!("{what}: {m}")),
            Error::Unsupported(m) => Error::Unsupported(format!("{what}: {m}")),
            other => other,
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
