//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by dataset construction, estimation, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix had an unexpected length.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structurally invalid argument (bad grid, empty input, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A view with no visible observations was passed to an estimator.
    #[error("empty view: no visible observations")]
    EmptyView,

    /// The penalized objective became non-finite during iteration.
    #[error("solver diverged: {0}")]
    Divergence(String),

    /// Every candidate tuning parameter failed to produce a fit.
    #[error("no usable fit: {0}")]
    NoUsableFit(String),

    /// More than the tolerated fraction of resample fits was dropped.
    #[error("too many resample fits dropped: {dropped} of {total}")]
    TooManyDropped { dropped: usize, total: usize },

    /// Failure attributed to a specific simulation replicate.
    #[error("replicate {replicate}: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
