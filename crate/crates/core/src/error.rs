use thiserror::Error;

/// Errors raised by tree construction, the expansion operators and the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FmmError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    #[error("near-field backend `{backend}` failed during {phase}: {message}")]
    Backend {
        backend: String,
        phase: &'static str,
        message: String,
    },
}

impl FmmError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        FmmError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = FmmError> = std::result::Result<T, E>;
