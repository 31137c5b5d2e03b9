use thiserror::Error;

/// Unified error type for the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Structural problems: mismatched shapes, non-positive counts, bad config values.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A probability object failed validation (negative mass, slice not summing to 1).
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A requested computation exceeds a configured size cap.
    #[error("{what} requires {needed} {unit}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
        unit: &'static str,
    },

    /// Placement rejection sampling did not find a valid point within the attempt bound.
    #[error("placement rejection sampling failed after {attempts} attempts (degenerate geometry)")]
    DegenerateGeometry { attempts: usize },

    /// An operation only defined for a specific user count was called with another.
    #[error("operation supports exactly {supported} users, got {got}")]
    UnsupportedUserCount { supported: usize, got: usize },

    /// A matrix factorization failed beyond the jitter retry, or dual-path
    /// computations disagreed beyond tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
