use thiserror::Error;

/// Failure classes, each with its own process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot read input: {0}")]
    Input(String),
    #[error(transparent)]
    Core(spinphonon::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    /// 2 is left to argument parsing errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 3,
            CliError::Core(e) if e.is_integration_failure() => 4,
            CliError::Core(_) => 1,
            CliError::Output(_) => 5,
            CliError::Input(_) => 6,
        }
    }
}

impl From<spinphonon::Error> for CliError {
    fn from(e: spinphonon::Error) -> Self {
        CliError::Core(e)
    }
}
