//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, simulation, analysis, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A constraint on a named input field was violated.
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    /// A domain-level precondition failed (e.g. non-positive resource ratio).
    #[error("domain error: {0}")]
    Domain(String),

    /// A message cannot be routed over the given topology.
    #[error("message `{message}` is not routable: {reason}")]
    Unroutable { message: String, reason: String },

    /// The procedure never crosses the backhaul, so distance has no effect.
    #[error("degenerate procedure `{procedure}`: no backhaul crossings, distance has no effect")]
    DegenerateProcedure { procedure: String },

    /// A scenario file failed to parse or validate.
    #[error("scenario error: {0}")]
    Scenario(String),

    /// An experiment failed while writing its outputs.
    #[error("experiment `{experiment}` failed: {source}")]
    ExperimentIo {
        experiment: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(field: &str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
