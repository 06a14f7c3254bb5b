use thiserror::Error;

/// Errors produced by the spectral-law routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed word: {0}")]
    MalformedWord(String),

    #[error("half-length k = {k} exceeds the enumeration guard {guard}")]
    ResourceLimit { k: u32, guard: u32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("pole in the asymptotic sequence at k = {k} (k + 1 - beta = 0)")]
    Pole { k: u32 },

    #[error("density 1/(1+|x|^beta) is not integrable for beta = {0} (need beta > 1)")]
    NonIntegrable(f64),

    #[error("count table cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_param(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}
