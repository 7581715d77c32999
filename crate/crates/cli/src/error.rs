use capwhitham::Error as CoreError;

/// Failures of a CLI command, each mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Numerical(CoreError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{failed} of {total} acceptance criteria failed")]
    VerifyFailed { failed: usize, total: usize },
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::WrongRegime { .. }
            | CoreError::CriticalBond { .. }
            | CoreError::NonPositiveInput { .. }
            | CoreError::AmplitudeOutOfRange { .. }
            | CoreError::DomainTooShort { .. }
            | CoreError::GridTooCoarse { .. }
            | CoreError::InvalidGrid { .. } => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerifyFailed { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }

    /// Short machine-readable tag for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
            CliError::VerifyFailed { .. } => "verify",
        }
    }
}
