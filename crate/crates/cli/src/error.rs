use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("solver: {0}")]
    Solver(String),

    #[error("verification failed: {0}")]
    Verify(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Verify(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<haraux_core::Error> for CliError {
    fn from(e: haraux_core::Error) -> Self {
        use haraux_core::Error as E;
        match e {
            E::Parse(_) | E::InvalidOperator(_) | E::DimensionMismatch { .. } | E::Unsupported(_) | E::Domain(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Solver(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use haraux_core::Error as E;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(E::Parse("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(E::Domain("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(E::NoSolution("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(E::NoConvergence { iterations: 3, residual: 1.0 }).exit_code(), 3);
        assert_eq!(CliError::Verify("x".into()).exit_code(), 1);
    }
}
