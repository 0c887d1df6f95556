use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two neighbouring pieces of a piecewise polynomial disagree at their shared knot.
    #[error("pieces disagree at knot {knot}")]
    KnotMismatch { knot: i64 },

    #[error("insufficient precision: {0}")]
    Precision(String),

    /// |D_k(t)| fell below the trust threshold relative to D_k(0).
    #[error("determinant D_{k}(t) too close to zero at t = {t}")]
    NearZeroDeterminant { k: u32, t: String },

    #[error("truncation tail bound {bound} exceeds tolerance {tolerance}")]
    TailBound { bound: String, tolerance: String },

    #[error("enumeration of {size} tuples exceeds the feasibility guard {limit}")]
    Infeasible { size: u128, limit: u128 },

    #[error("cache file: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Errors that mean "rerun with more digits" rather than "bad input".
    pub fn is_precision_failure(&self) -> bool {
        matches!(
            self,
            Error::Precision(_) | Error::NearZeroDeterminant { .. } | Error::TailBound { .. }
        )
    }
}
