use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DunklError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("envelope check failed: boundary mass fraction {fraction:.3e} exceeds {limit:.3e}")]
    Envelope { fraction: f64, limit: f64 },

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, DunklError>;

pub(crate) fn domain(msg: impl Into<String>) -> DunklError {
    DunklError::Domain(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> DunklError {
    DunklError::InvalidParameter(msg.into())
}

pub(crate) fn grid_err(msg: impl Into<String>) -> DunklError {
    DunklError::Grid(msg.into())
}
