use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested problem is too large for the selected method.
    #[error("capacity error: {0}")]
    Capacity(String),
    /// A structural precondition on a scenario does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A constant provider cannot supply the requested constant.
    #[error("constant unavailable: {0}")]
    Unavailable(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
