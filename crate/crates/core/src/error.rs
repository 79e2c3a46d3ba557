use thiserror::Error;

/// Errors raised by the entropy toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("group dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unsupported group dimension {0} (only Z and Z^2 are modeled)")]
    UnsupportedDimension(usize),

    #[error("Folner box index must be at least 1")]
    EmptyWindow,

    #[error("group element {element} lies outside the cocycle domain ({domain})")]
    Domain { element: String, domain: &'static str },

    #[error("fiber point {point} is not in a fiber of size {size}")]
    PointOutOfRange { point: u64, size: u128 },

    #[error("instance of {size} points is too large for the exact solver (cap {cap}); use the greedy method")]
    TooLargeForExact { size: u128, cap: usize },

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
