use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid constraints: {0}")]
    InvalidConstraints(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("arrivals out of order: query at t={query} precedes t={last}")]
    OutOfOrder { query: f64, last: f64 },

    #[error("lp solver failure: {0}")]
    Solver(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
