//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Result exceeds the representable f64 range.
    #[error("overflow: {0}")]
    Overflow(String),

    /// A distribution parameter violates its constraints.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Requested moment does not exist for this parameterization.
    #[error("nonexistent moment: {0}")]
    NonexistentMoment(String),

    /// A structural reduction between families is not valid here.
    #[error("not reducible: {0}")]
    NotReducible(String),

    /// Input data cannot support the requested estimate.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Burst alignment against the training sequence failed.
    #[error("alignment failure: {0}")]
    Alignment(String),

    /// No training bursts were located in the capture.
    #[error("no bursts found in capture")]
    NoBursts,

    /// The reference density has mass where the candidate has none.
    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    /// Table-lookup mode has no critical values for this combination.
    #[error("table mode unavailable: {0}")]
    TableUnavailable(String),

    /// Malformed textual input (model records, bit strings, CSV).
    #[error("parse error: {0}")]
    Parse(String),

    /// Invalid analysis configuration.
    #[error("invalid config: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
