use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Caller-supplied parameter violates a precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A computation did not produce a trustworthy result.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// Tensor grid refused because of its size.
    #[error(
        "refusing a {dims}-dimensional tensor grid of order {order} \
         ({points:.3e} points); at most {max_dims} dimensions are supported"
    )]
    GridTooLarge {
        order: usize,
        dims: usize,
        points: f64,
        max_dims: usize,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
