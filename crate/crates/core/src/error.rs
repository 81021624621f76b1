use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid grid, nonlinearity, scenario, or run parameters.
    #[error("configuration error: {0}")]
    Config(String),
    /// An operation was called outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
