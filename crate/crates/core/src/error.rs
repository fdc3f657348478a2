use thiserror::Error;

/// Failure modes shared by the analytic and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Pathloss evaluated at zero three-dimensional distance.
    #[error("pathloss singularity at zero distance")]
    Singularity,

    /// The requested closed form is not a valid probability for these inputs.
    #[error("validity error: {0}")]
    Validity(String),

    /// A quadrature, series or root search did not meet its tolerance.
    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// The quantity is infinite for these parameters.
    #[error("divergence: {0}")]
    Divergence(String),

    /// The optimizer has no finite maximizer.
    #[error("no finite optimum: {0}")]
    NoFiniteOptimum(String),

    /// Argument in a region the implementation does not support.
    #[error("unsupported domain: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn numeric(msg: impl Into<String>) -> Error {
    Error::NumericFailure(msg.into())
}
