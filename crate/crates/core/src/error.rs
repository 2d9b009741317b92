use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the routine.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two grids that must share a size do not.
    #[error("grid size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    /// Inconsistent or invalid configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// A discretized density lost too much mass to truncation.
    #[error("truncation error: {0}")]
    Truncation(String),
    /// The operation is not defined for this kind of input.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A sweep failed at one grid point.
    #[error("at SNR {snr_db} dB: {source}")]
    AtSnr {
        snr_db: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
