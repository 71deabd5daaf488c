use thiserror::Error;

use crate::overlap::OverlapSolution;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The fixed-point iteration hit `max_iter`; `last` is the final iterate.
    #[error(
        "overlap iteration did not converge after {} iterations (residual {:.3e})",
        .last.iterations,
        .last.residual
    )]
    NotConverged { last: OverlapSolution },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
