use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TuneError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no measurement available")]
    NoMeasurement,
}

pub type Result<T, E = TuneError> = std::result::Result<T, E>;
