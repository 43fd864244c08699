use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the domain of the operation (bad vertex label,
    /// invalid bipartition, non-prime dimension for the analytic branch, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested dense object would exceed the amplitude guard.
    #[error("capacity exceeded: {what} needs {requested} entries, limit is {limit}")]
    Capacity {
        what: String,
        requested: u128,
        limit: u128,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A hypergraph document could not be parsed.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// A projection whose outcome has zero probability.
    #[error("outcome has zero probability")]
    ZeroProbability,
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
