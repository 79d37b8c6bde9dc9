use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parameter error: {0}")]
    Param(String),
    #[error("capability error: {0}")]
    Capability(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("session error: {0}")]
    Session(String),
    #[error("framing error: {0}")]
    Framing(String),
    #[error("negotiation error: {0}")]
    Negotiation(String),
    #[error("simulation failure: {0}")]
    Simulation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Param(msg.into()))
}

pub(crate) fn protocol<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Protocol(msg.into()))
}
