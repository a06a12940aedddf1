use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the operation's domain (non-neighbor pair,
    /// `s > t`, negative block radius, non-smooth test function, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A parameter combination cannot be run (CFL violation, unrepresentable
    /// rates, box too large for the master equation, ...).
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
