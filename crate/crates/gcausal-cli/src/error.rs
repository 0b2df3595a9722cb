//! Process-level error type mapping every failure onto a documented exit
//! code: 0 success, 2 configuration error, 3 data error, 4 numeric failure.

use gcausal_core::CoreError;

/// Any failure a subcommand can surface. The variant decides the exit code,
/// so constructors must pick the category the user can act on: Config for
/// bad settings or unreadable referenced paths, Data for malformed file
/// contents or shape mismatches, Numeric for procedures that failed despite
/// valid inputs.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::InvalidConfig(m) => CliError::Config(m),
            CoreError::InvalidData(m) => CliError::Data(m),
            CoreError::Numeric(m) => CliError::Numeric(m),
        }
    }
}

pub type Result<T> = core::result::Result<T, CliError>;
