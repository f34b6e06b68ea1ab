//! Accumulated values of annuities-due at a fixed annual rate.
//!
//! Every family has a closed form and an O(k) recursion. [`Method::Auto`]
//! uses the closed form except near its singular denominators, or where its
//! running error bound exceeds [`FIXED_CERTIFIED_REL`] (the closed forms
//! cancel when `j k` is small); the recursion is used there instead.

use serde::{Deserialize, Serialize};

use crate::closed;
use crate::error::{Error, Result};
use crate::rates::FixedRate;
use crate::scalar::Tracked;

/// Below this `|j|` the closed forms dividing by `d` are not used.
pub const SINGULAR_RATE: f64 = 1e-9;

/// Relative threshold on `|1 + j - q|` for the geometric closed form.
pub const SINGULAR_RATIO: f64 = 1e-9;

/// [`Method::Auto`] keeps a closed value only when its error bound is within
/// this fraction of `max(1, |value|)`.
pub const FIXED_CERTIFIED_REL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// The closed form as written, with no singularity handling.
    Closed,
    Recursive,
    /// Closed form with recursion fallback near singular denominators and
    /// where the closed value cannot be certified.
    #[default]
    Auto,
}

/// Whether payment schedules must consist of strictly positive payments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PaymentCheck {
    #[default]
    Strict,
    Unchecked,
}

pub(crate) fn near_zero_rate(j: f64) -> bool {
    j.abs() < SINGULAR_RATE
}

pub(crate) fn near_geometric_pole(growth: f64, q: f64) -> bool {
    (growth - q).abs() < SINGULAR_RATIO * q.abs().max(1.0)
}

fn evaluate(method: Method, singular: bool, closed: impl FnOnce() -> Tracked, recursion: impl FnOnce() -> f64) -> f64 {
    match method {
        Method::Closed => closed().value,
        Method::Recursive => recursion(),
        Method::Auto => {
            if !singular {
                let value = closed();
                if value.value.is_finite() && value.relative_error() <= FIXED_CERTIFIED_REL {
                    return value.value;
                }
            }
            recursion()
        }
    }
}

fn t(x: f64) -> Tracked {
    Tracked::exact(x)
}

/// Accumulated value of arbitrary payments `c_1..c_k` by the recursion
/// `acc = (1 + j)(acc + c_i)`.
pub fn accumulate(rate: &FixedRate, k: u32, mut payment: impl FnMut(u32) -> f64) -> f64 {
    let g = rate.growth();
    (1..=k).fold(0.0, |acc, i| g * (acc + payment(i)))
}

pub(crate) fn check_arithmetic(p: f64, q: f64, k: u32) -> Result<()> {
    if !p.is_finite() || !q.is_finite() {
        return Err(Error::domain("payments must be finite"));
    }
    if p <= 0.0 {
        return Err(Error::PaymentPositivity(format!("first payment p = {p} must be > 0")));
    }
    if k >= 1 {
        let last = p + f64::from(k - 1) * q;
        if last <= 0.0 {
            return Err(Error::PaymentPositivity(format!("payment {k} = p + (k-1)q = {last} must be > 0")));
        }
    }
    Ok(())
}

pub(crate) fn check_geometric(p: f64, q: f64) -> Result<()> {
    if !p.is_finite() || !q.is_finite() {
        return Err(Error::domain("payments must be finite"));
    }
    if p <= 0.0 || q <= 0.0 {
        return Err(Error::PaymentPositivity(format!(
            "geometric payments need p > 0 and q > 0 (got p = {p}, q = {q})"
        )));
    }
    Ok(())
}

/// Level payments of 1.
pub fn level_due(k: u32, rate: &FixedRate, method: Method) -> f64 {
    evaluate(method, near_zero_rate(rate.j), || closed::level(&t(rate.j), k), || accumulate(rate, k, |_| 1.0))
}

/// Payments `1, 2, ..., k`.
pub fn increasing_due(k: u32, rate: &FixedRate, method: Method) -> f64 {
    evaluate(method, near_zero_rate(rate.j), || closed::increasing(&t(rate.j), k), || accumulate(rate, k, f64::from))
}

/// Payments `1, 4, ..., k^2`.
pub fn increasing_squared_due(k: u32, rate: &FixedRate, method: Method) -> f64 {
    evaluate(
        method,
        near_zero_rate(rate.j),
        || closed::increasing_squared(&t(rate.j), k),
        || accumulate(rate, k, |i| f64::from(i) * f64::from(i)),
    )
}

/// Squared-increasing annuity through the level annuity only, falling back
/// to the recursion near `j = 0`.
pub fn increasing_squared_from_level(k: u32, rate: &FixedRate) -> f64 {
    if near_zero_rate(rate.j) {
        increasing_squared_due(k, rate, Method::Recursive)
    } else {
        closed::increasing_squared_from_level(&rate.j, k)
    }
}

/// Payments `n, n-1, ..., n-k+1`.
pub fn decreasing_due(n: u32, k: u32, rate: &FixedRate, method: Method) -> Result<f64> {
    if k > n {
        return Err(Error::domain(format!("decreasing annuity needs k <= n (k = {k}, n = {n})")));
    }
    Ok(evaluate(
        method,
        near_zero_rate(rate.j),
        || closed::decreasing(n, &t(rate.j), k),
        || accumulate(rate, k, |i| f64::from(n - i + 1)),
    ))
}

/// Payments `p, p+q, ..., p+(k-1)q`.
pub fn arithmetic_due(p: f64, q: f64, k: u32, rate: &FixedRate, method: Method, check: PaymentCheck) -> Result<f64> {
    if check == PaymentCheck::Strict {
        check_arithmetic(p, q, k)?;
    }
    Ok(evaluate(
        method,
        near_zero_rate(rate.j),
        || closed::arithmetic(&t(p), &t(q), &t(rate.j), k),
        || accumulate(rate, k, |i| p + f64::from(i - 1) * q),
    ))
}

/// Payments `p, pq, ..., pq^(k-1)`. At `q = 1 + j` the closed form is
/// singular and `Auto` sums directly, which gives `p k (1+j)^k`.
pub fn geometric_due(p: f64, q: f64, k: u32, rate: &FixedRate, method: Method, check: PaymentCheck) -> Result<f64> {
    if check == PaymentCheck::Strict {
        check_geometric(p, q)?;
    }
    Ok(geometric_unchecked(p, q, k, rate, method))
}

pub(crate) fn geometric_unchecked(p: f64, q: f64, k: u32, rate: &FixedRate, method: Method) -> f64 {
    evaluate(
        method,
        near_geometric_pole(rate.growth(), q),
        || closed::geometric(&t(p), &t(q), &t(rate.j), k),
        || {
            let mut payment = p;
            accumulate(rate, k, |i| {
                if i > 1 {
                    payment *= q;
                }
                payment
            })
        },
    )
}

/// Payments `1, 1+u, (1+u)^2, ...`. The closed path goes through the rate
/// `t` with `1 + u = (1 + j)(1 + t)`.
pub fn growth_due(u: f64, k: u32, rate: &FixedRate, method: Method) -> Result<f64> {
    if !u.is_finite() || 1.0 + u <= 0.0 {
        return Err(Error::domain(format!("growth rate u = {u} requires 1 + u > 0")));
    }
    if method == Method::Recursive {
        return Ok(geometric_unchecked(1.0, 1.0 + u, k, rate, Method::Recursive));
    }
    let t = FixedRate::new((1.0 + u) / rate.growth() - 1.0)?;
    let inner = match method {
        Method::Closed => closed::level(&t.j, k),
        _ => level_due(k, &t, Method::Auto),
    };
    Ok(rate.growth().powi(k as i32) * inner / t.growth())
}

/// One of the payment families, bound to a rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AccumulatorKind {
    Level,
    Increasing,
    IncreasingSquared,
    Decreasing { n: u32 },
    Arithmetic { p: f64, q: f64 },
    Geometric { p: f64, q: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accumulator {
    pub kind: AccumulatorKind,
    pub rate: FixedRate,
    pub check: PaymentCheck,
}

impl Accumulator {
    pub fn new(kind: AccumulatorKind, rate: FixedRate) -> Self {
        Accumulator { kind, rate, check: PaymentCheck::Strict }
    }

    pub fn with_check(mut self, check: PaymentCheck) -> Self {
        self.check = check;
        self
    }

    /// Accumulated value after `k` payments.
    pub fn value(&self, k: u32, method: Method) -> Result<f64> {
        let rate = &self.rate;
        match self.kind {
            AccumulatorKind::Level => Ok(level_due(k, rate, method)),
            AccumulatorKind::Increasing => Ok(increasing_due(k, rate, method)),
            AccumulatorKind::IncreasingSquared => Ok(increasing_squared_due(k, rate, method)),
            AccumulatorKind::Decreasing { n } => decreasing_due(n, k, rate, method),
            AccumulatorKind::Arithmetic { p, q } => arithmetic_due(p, q, k, rate, method, self.check),
            AccumulatorKind::Geometric { p, q } => geometric_due(p, q, k, rate, method, self.check),
        }
    }
}
