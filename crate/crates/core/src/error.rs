use thiserror::Error;

/// Errors raised by the code library, estimators and analytic routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid mode index: {0}")]
    InvalidMode(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symplectic (max deviation {deviation:.3e})")]
    NotSymplectic { deviation: f64 },

    #[error("decoder {decoder} cannot decode code {code}")]
    DecoderMismatch { decoder: String, code: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("empty input: {0}")]
    Empty(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
