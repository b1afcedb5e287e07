use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric or structural argument violated a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two matrices (or a matrix and a spec) live over different rings.
    #[error("ring mismatch: {0}")]
    RingMismatch(String),

    /// Matrix dimensions do not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An exhaustive walk would exceed the configured bound.
    #[error("enumeration bound exceeded: {needed} candidates, bound {bound}")]
    EnumerationBound { needed: u128, bound: u128 },

    /// A statistic was requested on an empty sample.
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    /// No closed-form prediction exists for this congruence level.
    #[error("no closed form at level m = {m}; supply an empirical base table")]
    NoClosedForm { m: u32 },

    /// A serialized table or report failed validation.
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
