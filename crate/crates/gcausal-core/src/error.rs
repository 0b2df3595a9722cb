//! Error type shared by all core modules.

use alloc::string::String;

/// Failure modes of the core algorithms.
///
/// `Invalid*` variants are caller mistakes (bad shapes, bad parameters);
/// `Numeric` covers genuine numerical breakdown (divergence, non-finite
/// loss, irreparable matrices). The distinction matters to the CLI, which
/// maps them to different exit codes.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    /// Input data violates a documented precondition.
    #[error("invalid data: {0}")]
    InvalidData(String),
    /// A configuration value is out of its documented range.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    /// A numerical procedure failed beyond repair.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CoreError {
    pub fn data(msg: impl Into<String>) -> Self {
        CoreError::InvalidData(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        CoreError::InvalidConfig(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        CoreError::Numeric(msg.into())
    }
}

pub type Result<T> = core::result::Result<T, CoreError>;
