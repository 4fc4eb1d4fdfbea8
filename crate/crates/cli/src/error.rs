use thiserror::Error;

/// Failures of a subcommand, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] amac_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),

    /// A verification ran to completion and found a violated check.
    #[error("{0}")]
    Assertion(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use amac_core::Error as E;
        match self {
            CliError::Assertion(_) => 1,
            CliError::Core(E::Convergence { .. } | E::Bracket { .. } | E::Infeasible(_)) => 2,
            CliError::Io(_) => 2,
            CliError::Core(_) | CliError::Usage(_) => 3,
        }
    }
}
