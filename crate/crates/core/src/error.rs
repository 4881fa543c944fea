use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at x = {0}")]
    GammaPole(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("expansion order {0} is not available (known orders: 1, 2)")]
    UnsupportedOrder(usize),

    #[error("point outside the effective domain: {0}")]
    Domain(String),

    #[error("non-positive logarithm argument in {0}")]
    LogArgument(&'static str),

    #[error("c = {c} is outside the {branch} branch")]
    Branch { c: f64, branch: &'static str },

    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),

    #[error("covariance factorization failed: {0}")]
    Factorization(String),
}

impl Error {
    /// Failure of a numerical routine on valid input, as opposed to rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Overflow(_)
                | Error::LogArgument(_)
                | Error::NoConvergence(_)
                | Error::Factorization(_)
                | Error::GammaPole(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
