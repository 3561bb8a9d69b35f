use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A coefficient beyond the stored order was requested.
    #[error("truncation exceeded: coefficient {requested} requested from a series of order {order}")]
    TruncationExceeded { requested: usize, order: usize },

    #[error("z is an eigenvalue (singular resolvent)")]
    EigenvalueHit,

    #[error("insufficient window: {needed} sites needed, {available} available")]
    InsufficientWindow { needed: usize, available: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
