//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input outside the documented domain of a scalar function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Localization window δ(u) is undefined at this threshold.
    #[error("localization window undefined: {0}")]
    WindowUndefined(String),

    /// Asymptotic formulas require u > e.
    #[error("asymptotic domain requires u > e, got u = {0}")]
    AsymptoticDomain(f64),

    /// Circulant embedding produced an eigenvalue too negative to clip.
    #[error(
        "circulant embedding failed: eigenvalue {eigenvalue:.6e} below \
         tolerance -{tolerance:.6e}"
    )]
    EmbeddingFailure { eigenvalue: f64, tolerance: f64 },

    /// Covariance factorization failed after the whole jitter ladder.
    #[error(
        "covariance not positive definite: most negative eigenvalue \
         {min_eigenvalue:.6e} (jitter ladder exhausted)"
    )]
    NotPositiveDefinite { min_eigenvalue: f64 },

    /// A kernel or profile evaluated to a non-finite value.
    #[error("model error: {0}")]
    Model(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }

    /// Process exit code contract: config errors are distinguished from
    /// numerical/model failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
