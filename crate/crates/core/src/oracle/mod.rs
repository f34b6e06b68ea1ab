//! Independent checks of the analytic moments: exact enumeration over
//! two-point rate paths and seeded Monte Carlo under several rate
//! distributions with the same first two moments.

pub mod distribution;
pub mod enumerate;
pub mod report;
pub mod simulate;

pub use distribution::{lognormal_parameters, DistributionKind, RateDistribution};
pub use enumerate::{enumerate_exact, enumerate_series, ExactMoments, MAX_ENUMERATION_K};
pub use report::{
    compare, relative_deviation, Comparison, OracleKind, OraclePoint, OracleReport, OracleSeries, Rule, Verdict,
};
pub use simulate::{path_rates, simulate, simulate_series, Moments4, SimConfig, SimEstimate};
