use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of a closed-form chart or basis function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid run configuration (rejected before any allocation).
    #[error("config error: {0}")]
    Config(String),

    /// Parse failure in a configuration file.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },

    /// Non-finite values produced by the evolution.
    #[error("numerical failure at t = {time}: {msg}")]
    Numerical { time: f64, msg: String },

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
