//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("cannot parse rational from {0:?}")]
    BadRational(String),

    #[error("{field}: expected length {expected}, got {got}")]
    LengthMismatch {
        field: String,
        expected: usize,
        got: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bump exponent {got} < J+K = {need} in variable {var}")]
    BumpTooSmall { var: usize, got: u32, need: u32 },

    #[error(
        "metric weight not real: coefficient at z^{z:?} zbar^{zbar:?} breaks conjugate symmetry"
    )]
    MetricNotReal { z: Vec<u32>, zbar: Vec<u32> },

    #[error("section support mismatch in variable {var}: vanishing order {order} against pole orders ({holo},{anti})")]
    SectionSupportMismatch {
        var: usize,
        order: u32,
        holo: u32,
        anti: u32,
    },

    #[error("numerator not divisible by (1 - z_{var}*zbar_{var})^{need}")]
    BumpNotDivisible { var: usize, need: u32 },

    #[error(
        "hypothesis violated in variable {var}: section order 0 but pole orders ({holo},{anti})"
    )]
    HypothesisViolated { var: usize, holo: u32, anti: u32 },

    #[error("principal value needs kappa = 0, got {0}")]
    NotPrincipalValue(usize),

    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("pole order must be {expected}, got {got}")]
    WrongPoleOrder { expected: u32, got: u32 },

    #[error("numerator must be holomorphic (no zbar exponents)")]
    NotHolomorphic,

    #[error("{0}")]
    Invalid(String),
}
