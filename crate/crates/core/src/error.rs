//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Grid or solver configuration is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// A pointwise exponential would leave the f64 range. The message names
    /// the offending value; callers that need the quantity anyway should
    /// switch to the [`crate::logscalar::LogScalar`] pipeline.
    #[error("overflow: {context}: exponent {value:.6e} exceeds guard {guard}")]
    Overflow {
        context: String,
        value: f64,
        guard: f64,
    },

    /// An operation precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The input makes the requested quantity undefined (e.g. a ratio with a
    /// vanishing denominator).
    #[error("undefined input: {0}")]
    UndefinedInput(String),

    /// Geometry leaves the unit square.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input collection was empty where at least one element is required.
    #[error("empty input: {0}")]
    Empty(String),
}

pub type Result<T> = std::result::Result<T, Error>;
