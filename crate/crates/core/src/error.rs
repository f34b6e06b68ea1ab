//! Error type shared by every operation in the crate.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A strict payment schedule would contain a non-positive payment.
    #[error("non-positive payment: {0}")]
    PaymentPositivity(String),

    /// Exact enumeration was asked for more paths than the budget allows.
    #[error("enumeration over 2^{k} paths exceeds the budget of 2^{max}")]
    BudgetExceeded { k: u32, max: u32 },

    /// A computed variance is negative beyond rounding tolerance.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Analytic and oracle series do not cover the same horizon.
    #[error("series length mismatch: analytic has {analytic}, oracle has {oracle}")]
    ShapeMismatch { analytic: usize, oracle: usize },

    /// Simulation or distribution settings are unusable.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
