use alloc::string::String;

/// Errors raised by the pricing core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(&'static str),

    #[error("jump mean diverges: upward rate a_{index} = {rate} must exceed 1")]
    DivergentJumpMean { index: usize, rate: f64 },

    #[error("barrier jump-integral divergent: {branch} component {index} violates {condition}")]
    BarrierIntegralDivergent { branch: &'static str, index: usize, condition: &'static str },

    #[error("jump sampler only supports nonnegative mixture weights ({branch} component {index} has weight {weight})")]
    UnsupportedSampler { branch: &'static str, index: usize, weight: f64 },

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("contract mismatch: {0}")]
    Contract(&'static str),

    #[error("generator evaluated on a knocked-out state")]
    DeadState,

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
