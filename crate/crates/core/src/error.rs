use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PickandsError {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("variance table covers |t| <= {max}, queried at {t}")]
    InterpolationRange { t: f64, max: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate model: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("factorization failed: {0}")]
    Factorization(String),
}

pub type Result<T> = std::result::Result<T, PickandsError>;
