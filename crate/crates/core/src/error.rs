use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The query needs exhaustive enumeration on a ground set that is too large.
    #[error("{operation} needs exhaustive enumeration; ground set of size {m} exceeds the limit of {limit}")]
    Capability {
        operation: &'static str,
        m: usize,
        limit: usize,
    },

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("element {0} is a loop and cannot be placed in any independent set")]
    Loop(usize),

    #[error("no element reached the toss-probability threshold; best candidate {element} with estimate {estimate:.4} (threshold {threshold:.4})")]
    Estimation {
        element: usize,
        estimate: f64,
        threshold: f64,
    },
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
