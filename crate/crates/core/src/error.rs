//! Error types shared across the crate.

use thiserror::Error;

/// Which baseband branch an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// In-phase branch (gains `B_j`).
    I,
    /// Quadrature branch (gains `A_j`).
    Q,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::I => write!(f, "I"),
            Branch::Q => write!(f, "Q"),
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A sub-channel gain is zero, negative, or non-finite.
    #[error("{branch} branch gain #{index} is not strictly positive (got {value})")]
    NonPositiveGain {
        branch: Branch,
        index: usize,
        value: f64,
    },

    /// A gain fails the layered-formation constraint: each gain must exceed
    /// the sum of all weaker gains on its branch.
    #[error(
        "{branch} branch gain #{index} ({gain}) does not exceed the sum of the \
         weaker gains ({interference})"
    )]
    ConstraintViolation {
        branch: Branch,
        index: usize,
        gain: f64,
        interference: f64,
    },

    /// The quadrature branch must carry at least one sub-channel.
    #[error("profile has no quadrature (Q) sub-channels; m >= 1 is required")]
    QuadratureBranchEmpty,

    /// Stretch factors below 1 would shrink the constellation.
    #[error("stretch factor must be >= 1 (got {r})")]
    InvalidStretch { r: f64 },

    /// The constellation exceeds the enumeration cap.
    #[error("constellation with {bits} bits exceeds the {cap}-bit enumeration cap")]
    TooLarge { bits: usize, cap: usize },

    /// A codeword's length does not match the profile it is used with.
    #[error("codeword has {actual} bits but the profile requires {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    /// A sweep or scan configuration is unusable.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The requested BER is outside the range of the analytic curve.
    #[error("target BER {target} is outside the reachable range of the analytic curve")]
    TargetOutOfRange { target: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
