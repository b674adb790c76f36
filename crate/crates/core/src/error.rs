use thiserror::Error;

/// Errors raised by the numerical and physics routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("length mismatch: grid has {expected} nodes, got {actual} values")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported dimension {0}; only 1 and 3 are supported")]
    UnsupportedDimension(u8),

    #[error("resonant member: cos(k1 * x0) vanishes at k1 = {k1}")]
    ResonantMember { k1: f64 },

    #[error("spectrum is not normalizable")]
    NonNormalizable,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
