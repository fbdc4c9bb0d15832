use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or inconsistent arguments: bad coordinates, negative counts,
    /// mismatched shapes, unknown dimensions.
    #[error("invalid input: {0}")]
    Input(String),

    /// Exhaustive enumeration would exceed the configured size cap.
    #[error("enumeration of {size} joint partitions exceeds the cap of {cap}")]
    Infeasible { size: u128, cap: u128 },

    /// The computation is undefined for the supplied data, e.g. a positive
    /// observed count over a zero expectation.
    #[error("degenerate data: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
