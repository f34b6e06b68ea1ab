//! Accumulated values of annuities-due with level, arithmetic and geometric
//! payments, under a fixed annual rate and under i.i.d. random annual rates
//! described by their mean and variance.
//!
//! - [`rates`]: fixed and stochastic rate records and their derived rates.
//! - [`fixed`]: fixed-rate accumulated values, closed form and recursion.
//! - [`moments`]: mean, second moment and variance under random rates.
//! - [`corollary`]: specialised variance formulas for the classic patterns.
//! - [`oracle`]: exact enumeration and Monte Carlo checks of the moments.
//! - [`identities`]: the fixed-rate identity grid and stochastic invariants.

pub mod closed;
pub mod corollary;
pub mod error;
pub mod fixed;
pub mod identities;
pub mod moments;
pub mod oracle;
pub mod plan;
pub mod rates;
pub mod scalar;

pub use error::{Error, Result};
pub use fixed::{Method, PaymentCheck};
pub use moments::{EvalPath, MomentRow, MomentSeries};
pub use plan::{Family, PaymentPlan};
pub use rates::{FixedRate, GeometricAux, StochasticRateSpec};
