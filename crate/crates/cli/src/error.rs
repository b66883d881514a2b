use thiserror::Error;

/// Exit codes: 0 success, 2 configuration, 3 runtime, 4 study quality gate.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("study quality gate: {0}")]
    Quality(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Quality(_) => 4,
        }
    }

    pub fn runtime(err: impl std::fmt::Display) -> Self {
        CliError::Runtime(err.to_string())
    }
}

/// Library errors raised while checking a configuration.
impl From<fowler_split::Error> for CliError {
    fn from(err: fowler_split::Error) -> Self {
        CliError::Config(err.to_string())
    }
}
