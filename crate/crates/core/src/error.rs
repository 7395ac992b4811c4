use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not {0} within tolerance")]
    NotWellFormed(&'static str),

    #[error("mitigation scheme {scheme} is not available for the {layout} layout")]
    IncompatibleMitigation {
        scheme: &'static str,
        layout: &'static str,
    },

    #[error("invalid gate: {0}")]
    InvalidGate(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
