use thiserror::Error;

/// Harness errors, split by exit code: configuration and output problems
/// exit with 2, numeric or precondition failures from the library exit
/// with 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("output error: {0}")]
    Output(String),

    #[error(transparent)]
    Run(#[from] fpec_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Run(_) => 3,
        }
    }
}
