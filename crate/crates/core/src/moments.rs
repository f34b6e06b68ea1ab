//! Mean, second moment and variance of the accumulated value `C_k` when the
//! annual rates are i.i.d. with mean `j` and variance `s2`.
//!
//! Two independent routes are provided. The forward recursions
//! `C_k = (1 + i_k)(C_{k-1} + c_k)` taken in expectation are the reference;
//! the closed forms express the same moments through fixed-rate annuities at
//! the rates `j`, `f` and `r`.
//!
//! The closed forms are evaluated with a running error bound ([`Tracked`]).
//! A variance is `m_k - mu_k^2`, which cancels badly when the variance is
//! small next to `m_k`; when the bound shows the closed value cannot be
//! trusted the recursion value is reported instead, tagged
//! [`EvalPath::Recursive`].

use serde::{Deserialize, Serialize};

use crate::closed::{self, RateTerms};
use crate::error::{Error, Result};
use crate::fixed::{self, near_geometric_pole, near_zero_rate, Method};
use crate::plan::{Family, PaymentPlan};
use crate::rates::StochasticRateSpec;
use crate::scalar::Tracked;

/// A closed-form moment is reported only when its error bound is below
/// this fraction of its own magnitude.
pub const CERTIFIED_REL: f64 = 2e-11;

/// A closed-form variance below `-NEGATIVE_VARIANCE_TOL * m_k` that its
/// error bound does not explain is a numerical failure.
pub const NEGATIVE_VARIANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalPath {
    Closed,
    Recursive,
}

/// A reported moment and the route that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub path: EvalPath,
}

/// Moments of `C_k` for one `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub k: u32,
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    /// `M1_k`, the squared-payment part of `m_k`.
    pub m1: f64,
    /// `M2_k`, the cross part: `m_k = M1_k + 2 M2_k`.
    pub m2: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentSeries {
    pub rows: Vec<MomentRow>,
}

impl MomentSeries {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, k: u32) -> Option<&MomentRow> {
        self.rows.get((k as usize).checked_sub(1)?)
    }

    pub fn means(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mean).collect()
    }

    pub fn variances(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.variance).collect()
    }
}

/// All recursive moments for `k = 1..=n` in one forward pass.
///
/// The variance uses `Var(C_k) = m Var(C_{k-1}) + s2 (mu_{k-1} + c_k)^2`,
/// which follows from the same independence argument as the moment
/// recursions and never subtracts nearly equal quantities.
pub fn recursive_series(plan: &PaymentPlan, spec: &StochasticRateSpec) -> MomentSeries {
    let (mu, m, s2) = (spec.mu, spec.m, spec.s2);
    let mut mean = 0.0;
    let mut second = 0.0;
    let mut variance = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    let rows = (1..=plan.n)
        .map(|k| {
            let c = plan.payment(k);
            m2 = m * (m2 + c * mean);
            m1 = m * (m1 + c * c);
            variance = m * variance + s2 * (mean + c) * (mean + c);
            second = m * (second + 2.0 * c * mean + c * c);
            mean = mu * (mean + c);
            MomentRow { k, mean, second_moment: second, variance, m1, m2 }
        })
        .collect();
    MomentSeries { rows }
}

/// `mu_1 = p mu`, `mu_k = mu (mu_{k-1} + c_k)`.
pub fn mean_series_recursive(plan: &PaymentPlan, spec: &StochasticRateSpec) -> Vec<f64> {
    recursive_series(plan, spec).means()
}

/// `m_1 = p^2 m`, `m_k = m (m_{k-1} + 2 c_k mu_{k-1} + c_k^2)`.
pub fn second_moment_series_recursive(plan: &PaymentPlan, spec: &StochasticRateSpec) -> Vec<f64> {
    recursive_series(plan, spec).rows.iter().map(|r| r.second_moment).collect()
}

fn recursive_row(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<MomentRow> {
    plan.check_k(k)?;
    let series = recursive_series(&plan.with_horizon(k)?, spec);
    Ok(series.rows[k as usize - 1])
}

fn require(plan: &PaymentPlan, family: Family) -> Result<()> {
    if plan.family != family {
        return Err(Error::domain(format!("operation needs a {family:?} plan, got {:?}", plan.family)));
    }
    Ok(())
}

/// Closed mean: the fixed-rate annuity at the mean rate. Independent of `s2`.
pub fn mean_closed(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<f64> {
    plan.check_k(k)?;
    let rate = spec.mean_rate();
    let unchecked = fixed::PaymentCheck::Unchecked;
    match plan.family {
        Family::Arithmetic => fixed::arithmetic_due(plan.p, plan.q, k, &rate, Method::Auto, unchecked),
        Family::Geometric => fixed::geometric_due(plan.p, plan.q, k, &rate, Method::Auto, unchecked),
    }
}

fn rate_terms(spec: &StochasticRateSpec) -> RateTerms<Tracked> {
    RateTerms::new(spec.j, spec.s2)
}

fn tracked(x: f64) -> Tracked {
    Tracked::exact(x)
}

/// Closed forms at rate `j`, `f` or `r` divide by that rate's discount.
fn arithmetic_singular(spec: &StochasticRateSpec) -> bool {
    near_zero_rate(spec.j) || near_zero_rate(spec.f) || near_zero_rate(spec.r)
}

fn geometric_singular(plan: &PaymentPlan, spec: &StochasticRateSpec) -> bool {
    let q = plan.q;
    near_geometric_pole(spec.mu, q) || near_geometric_pole(1.0 + spec.r, q) || near_geometric_pole(spec.m, q * q)
}

/// `M1_k = sum_i c_i^2 m^(k-i+1)`, summed directly.
pub fn m1_defining_sum(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<f64> {
    plan.check_k(k)?;
    Ok((1..=k).map(|i| plan.payment(i).powi(2) * spec.m.powi((k - i + 1) as i32)).sum())
}

/// `M2_k = sum_{i<k} c_{i+1} m^(k-i) mu_i`, summed directly.
pub fn m2_defining_sum(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<f64> {
    plan.check_k(k)?;
    let means = mean_series_recursive(&plan.with_horizon(k)?, spec);
    Ok((1..k).map(|i| plan.payment(i + 1) * spec.m.powi((k - i) as i32) * means[i as usize - 1]).sum())
}

/// `M1_k` of an arithmetic plan, all annuities at `(k, f)`.
pub fn m1_arithmetic(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<f64> {
    require(plan, Family::Arithmetic)?;
    plan.check_k(k)?;
    if near_zero_rate(spec.f) {
        return m1_defining_sum(plan, spec, k);
    }
    Ok(closed::m1_arithmetic(&tracked(plan.p), &tracked(plan.q), &rate_terms(spec), k).value)
}

/// `M1_k` of an arithmetic plan through the annuities at `(k - 1, f)`.
pub fn m1_arithmetic_shifted(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<f64> {
    require(plan, Family::Arithmetic)?;
    plan.check_k(k)?;
    if near_zero_rate(spec.f) {
        return m1_defining_sum(plan, spec, k);
    }
    Ok(closed::m1_arithmetic_shifted(&tracked(plan.p), &tracked(plan.q), &rate_terms(spec), k).value)
}

/// `M2_k` of an arithmetic plan; the defining sum near singular rates.
pub fn m2_arithmetic(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<f64> {
    require(plan, Family::Arithmetic)?;
    plan.check_k(k)?;
    if arithmetic_singular(spec) {
        return m2_defining_sum(plan, spec, k);
    }
    Ok(closed::m2_arithmetic(&tracked(plan.p), &tracked(plan.q), &rate_terms(spec), k).value)
}

fn second_moment_arithmetic_tracked(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Tracked {
    closed::second_moment_arithmetic(&tracked(plan.p), &tracked(plan.q), &rate_terms(spec), k)
}

fn mean_squared_arithmetic_tracked(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Tracked {
    closed::mean_squared_arithmetic(&tracked(plan.p), &tracked(plan.q), &tracked(spec.j), k)
}

/// `m_k` of an arithmetic plan in closed form; the recursion near singular rates.
pub fn second_moment_closed_arithmetic(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<f64> {
    require(plan, Family::Arithmetic)?;
    plan.check_k(k)?;
    if arithmetic_singular(spec) {
        return Ok(recursive_row(plan, spec, k)?.second_moment);
    }
    Ok(second_moment_arithmetic_tracked(plan, spec, k).value)
}

/// `mu_k^2` of an arithmetic plan in closed form; the squared mean near `j = 0`.
pub fn mean_squared_arithmetic(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<f64> {
    require(plan, Family::Arithmetic)?;
    plan.check_k(k)?;
    if near_zero_rate(spec.j) {
        return Ok(mean_closed(plan, spec, k)?.powi(2));
    }
    Ok(mean_squared_arithmetic_tracked(plan, spec, k).value)
}

/// Decides between a closed-form variance and the recursion.
///
/// A closed value whose error bound is within [`CERTIFIED_REL`] of its own
/// magnitude is kept. Otherwise the difference `m_k - mu_k^2` has cancelled
/// and the recursion is reported. A negative value that rounding cannot
/// explain is a [`Error::NumericalFailure`].
pub(crate) fn certify_variance(
    raw: Tracked,
    second_moment: f64,
    recursion: impl FnOnce() -> Result<f64>,
) -> Result<Estimate> {
    let floor = -NEGATIVE_VARIANCE_TOL * second_moment.abs().max(1.0);
    let explained = -raw.value <= raw.error;
    if raw.value < floor && !explained {
        return Err(Error::NumericalFailure(format!(
            "closed-form variance {} is below -{NEGATIVE_VARIANCE_TOL} m_k (m_k = {second_moment})",
            raw.value
        )));
    }
    if raw.certified(CERTIFIED_REL) && raw.value >= 0.0 {
        return Ok(Estimate { value: raw.value, path: EvalPath::Closed });
    }
    Ok(Estimate { value: recursion()?, path: EvalPath::Recursive })
}

/// `Var(C_k) = m_k - mu_k^2` for an arithmetic plan; exactly 0 when `s2 = 0`.
pub fn variance_arithmetic(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<Estimate> {
    require(plan, Family::Arithmetic)?;
    plan.check_k(k)?;
    if spec.s2 == 0.0 {
        return Ok(Estimate { value: 0.0, path: EvalPath::Closed });
    }
    let recursion = || Ok(recursive_row(plan, spec, k)?.variance);
    if arithmetic_singular(spec) {
        return Ok(Estimate { value: recursion()?, path: EvalPath::Recursive });
    }
    let second = second_moment_arithmetic_tracked(plan, spec, k);
    let raw = second - mean_squared_arithmetic_tracked(plan, spec, k);
    certify_variance(raw, second.value, recursion)
}

fn m1_geometric_tracked(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Tracked {
    closed::m1_geometric(&tracked(plan.p), &tracked(plan.q), &rate_terms(spec), k)
}

fn second_moment_geometric_tracked(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Tracked {
    closed::second_moment_geometric(&tracked(plan.p), &tracked(plan.q), &rate_terms(spec), k)
}

fn mean_squared_geometric_tracked(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Tracked {
    closed::mean_squared_geometric(&tracked(plan.p), &tracked(plan.q), &tracked(spec.j), k)
}

/// `M1_k` of a geometric plan: the geometric annuity `(p^2, q^2)` at rate `f`.
pub fn m1_geometric(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<f64> {
    require(plan, Family::Geometric)?;
    plan.check_k(k)?;
    if near_geometric_pole(spec.m, plan.q * plan.q) {
        return m1_defining_sum(plan, spec, k);
    }
    Ok(m1_geometric_tracked(plan, spec, k).value)
}

/// `M2_k` of a geometric plan; the defining sum near its poles.
pub fn m2_geometric(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<f64> {
    require(plan, Family::Geometric)?;
    plan.check_k(k)?;
    if geometric_singular(plan, spec) {
        return m2_defining_sum(plan, spec, k);
    }
    Ok(closed::m2_geometric(&tracked(plan.p), &tracked(plan.q), &rate_terms(spec), k).value)
}

pub fn second_moment_closed_geometric(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<f64> {
    require(plan, Family::Geometric)?;
    plan.check_k(k)?;
    if geometric_singular(plan, spec) {
        return Ok(recursive_row(plan, spec, k)?.second_moment);
    }
    Ok(second_moment_geometric_tracked(plan, spec, k).value)
}

pub fn mean_squared_geometric(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<f64> {
    require(plan, Family::Geometric)?;
    plan.check_k(k)?;
    if near_geometric_pole(spec.mu, plan.q) {
        return Ok(mean_closed(plan, spec, k)?.powi(2));
    }
    Ok(mean_squared_geometric_tracked(plan, spec, k).value)
}

pub fn variance_geometric(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<Estimate> {
    require(plan, Family::Geometric)?;
    plan.check_k(k)?;
    if spec.s2 == 0.0 {
        return Ok(Estimate { value: 0.0, path: EvalPath::Closed });
    }
    let recursion = || Ok(recursive_row(plan, spec, k)?.variance);
    if geometric_singular(plan, spec) {
        return Ok(Estimate { value: recursion()?, path: EvalPath::Recursive });
    }
    let second = second_moment_geometric_tracked(plan, spec, k);
    let raw = second - mean_squared_geometric_tracked(plan, spec, k);
    certify_variance(raw, second.value, recursion)
}

/// The uncertified closed-form `m_k - mu_k^2` with its error bound, or
/// `None` where the closed forms are singular.
pub fn raw_closed_variance(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<Option<Tracked>> {
    plan.check_k(k)?;
    Ok(match plan.family {
        Family::Arithmetic if !arithmetic_singular(spec) => {
            Some(second_moment_arithmetic_tracked(plan, spec, k) - mean_squared_arithmetic_tracked(plan, spec, k))
        }
        Family::Geometric if !geometric_singular(plan, spec) => {
            Some(second_moment_geometric_tracked(plan, spec, k) - mean_squared_geometric_tracked(plan, spec, k))
        }
        _ => None,
    })
}

/// `m_k` for reporting: the closed form when its error bound is within
/// [`CERTIFIED_REL`] of its value, the recursion otherwise.
pub fn second_moment(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<Estimate> {
    plan.check_k(k)?;
    let closed = match plan.family {
        Family::Arithmetic if !arithmetic_singular(spec) => Some(second_moment_arithmetic_tracked(plan, spec, k)),
        Family::Geometric if !geometric_singular(plan, spec) => Some(second_moment_geometric_tracked(plan, spec, k)),
        _ => None,
    };
    match closed {
        Some(m) if m.certified(CERTIFIED_REL) => Ok(Estimate { value: m.value, path: EvalPath::Closed }),
        _ => Ok(Estimate { value: recursive_row(plan, spec, k)?.second_moment, path: EvalPath::Recursive }),
    }
}

/// The closed-form `m_k` without certification; the recursion only where
/// the closed forms are singular.
pub fn second_moment_closed(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<f64> {
    match plan.family {
        Family::Arithmetic => second_moment_closed_arithmetic(plan, spec, k),
        Family::Geometric => second_moment_closed_geometric(plan, spec, k),
    }
}

pub fn mean_squared(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<f64> {
    match plan.family {
        Family::Arithmetic => mean_squared_arithmetic(plan, spec, k),
        Family::Geometric => mean_squared_geometric(plan, spec, k),
    }
}

pub fn variance(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<Estimate> {
    match plan.family {
        Family::Arithmetic => variance_arithmetic(plan, spec, k),
        Family::Geometric => variance_geometric(plan, spec, k),
    }
}

pub fn m1(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<f64> {
    match plan.family {
        Family::Arithmetic => m1_arithmetic(plan, spec, k),
        Family::Geometric => m1_geometric(plan, spec, k),
    }
}

pub fn m2(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<f64> {
    match plan.family {
        Family::Arithmetic => m2_arithmetic(plan, spec, k),
        Family::Geometric => m2_geometric(plan, spec, k),
    }
}

/// Closed-form moments for `k = 1..=n`, with the fallbacks described on
/// each operation.
pub fn closed_series(plan: &PaymentPlan, spec: &StochasticRateSpec) -> Result<MomentSeries> {
    let rows = (1..=plan.n)
        .map(|k| {
            Ok(MomentRow {
                k,
                mean: mean_closed(plan, spec, k)?,
                second_moment: second_moment(plan, spec, k)?.value,
                variance: variance(plan, spec, k)?.value,
                m1: m1(plan, spec, k)?,
                m2: m2(plan, spec, k)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSeries { rows })
}

/// Moment series by the chosen route. `Closed` and `Auto` both use the closed
/// forms with their singularity and cancellation fallbacks.
pub fn analytic_series(plan: &PaymentPlan, spec: &StochasticRateSpec, method: Method) -> Result<MomentSeries> {
    match method {
        Method::Recursive => Ok(recursive_series(plan, spec)),
        Method::Closed | Method::Auto => closed_series(plan, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(j: f64, s2: f64) -> StochasticRateSpec {
        StochasticRateSpec::new(j, s2).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    fn level(n: u32) -> PaymentPlan {
        PaymentPlan::arithmetic(1.0, 0.0, n).unwrap()
    }

    fn increasing(n: u32) -> PaymentPlan {
        PaymentPlan::arithmetic(1.0, 1.0, n).unwrap()
    }

    #[test]
    fn mean_recursion_examples() {
        let s = spec(0.1, 0.04);
        assert!(close(mean_series_recursive(&level(2), &s)[1], 2.31));
        assert!(close(mean_series_recursive(&increasing(2), &s)[1], 3.41));
        let g = PaymentPlan::geometric(3.0, 1.2, 4).unwrap();
        assert!(close(mean_series_recursive(&g, &s)[0], 3.3));
    }

    #[test]
    fn mean_closed_examples() {
        let s = spec(0.1, 0.04);
        let g = PaymentPlan::geometric(1.0, 1.2, 2).unwrap();
        assert!(close(mean_closed(&g, &s, 2).unwrap(), 2.53));
        let d = PaymentPlan::arithmetic(2.0, -1.0, 2).unwrap();
        assert!(close(mean_closed(&d, &s, 2).unwrap(), 3.52));
        let means: Vec<f64> =
            [0.0, 0.01, 0.09].iter().map(|&s2| mean_closed(&increasing(5), &spec(0.1, s2), 5).unwrap()).collect();
        assert!(means.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn second_moment_examples() {
        let s = spec(0.1, 0.04);
        assert!(close(second_moment_series_recursive(&level(2), &s)[1], 5.5625));
        assert!(close(second_moment_series_recursive(&increasing(2), &s)[1], 12.0625));
        let g = PaymentPlan::geometric(1.0, 1.2, 2).unwrap();
        assert!(close(second_moment_series_recursive(&g, &s)[1], 6.6625));
        assert!(close(second_moment_closed_arithmetic(&level(2), &s, 2).unwrap(), 5.5625));
        assert!(close(second_moment_closed_arithmetic(&increasing(2), &s, 2).unwrap(), 12.0625));
        assert!(close(second_moment_closed_geometric(&g, &s, 2).unwrap(), 6.6625));
        let lvl = PaymentPlan::geometric(1.0, 1.0, 2).unwrap();
        assert!(close(second_moment_closed_geometric(&lvl, &s, 2).unwrap(), 5.5625));
    }

    #[test]
    fn deterministic_collapse() {
        let s = spec(0.1, 0.0);
        let plan = PaymentPlan::arithmetic(2.0, 3.0, 6).unwrap();
        for k in 1..=6 {
            let mean = mean_closed(&plan, &s, k).unwrap();
            let m = second_moment_closed_arithmetic(&plan, &s, k).unwrap();
            assert!((m - mean * mean).abs() <= 1e-10 * m);
            assert_eq!(variance_arithmetic(&plan, &s, k).unwrap().value, 0.0);
        }
        let g = PaymentPlan::geometric(1.0, 1.2, 6).unwrap();
        for k in 1..=6 {
            let mean = mean_closed(&g, &s, k).unwrap();
            let m = second_moment_closed_geometric(&g, &s, k).unwrap();
            assert!((m - mean * mean).abs() <= 1e-10 * m);
            assert!(variance_geometric(&g, &s, k).unwrap().value.abs() < 1e-12);
        }
    }

    #[test]
    fn m1_examples() {
        let s = spec(0.1, 0.04);
        let f = s.second_moment_rate();
        for k in 1..=4 {
            let lvl = level(4);
            assert!(close(m1_arithmetic(&lvl, &s, k).unwrap(), fixed::level_due(k, &f, Method::Recursive)));
            let inc = increasing(4);
            let i2s = fixed::increasing_squared_due(k, &f, Method::Recursive);
            assert!(close(m1_arithmetic(&inc, &s, k).unwrap(), i2s));
            assert!(close(m1_arithmetic_shifted(&inc, &s, k).unwrap(), i2s));
        }
        assert!(close(m1_arithmetic(&increasing(2), &s, 2).unwrap(), 6.5625));
        let plan = PaymentPlan::arithmetic(2.0, 3.0, 2).unwrap();
        assert!(close(m1_arithmetic(&plan, &s, 2).unwrap(), 37.5));
        assert!(close(m1_arithmetic_shifted(&plan, &s, 2).unwrap(), 37.5));

        let g = PaymentPlan::geometric(1.0, 1.2, 2).unwrap();
        assert!(close(m1_geometric(&g, &s, 2).unwrap(), 3.3625));
        let g = PaymentPlan::geometric(2.0, 1.2, 2).unwrap();
        assert!(close(m1_geometric(&g, &s, 1).unwrap(), 4.0 * s.m));
        let g = PaymentPlan::geometric(1.0, 1.0, 5).unwrap();
        assert!(close(m1_geometric(&g, &s, 5).unwrap(), fixed::level_due(5, &f, Method::Recursive)));
    }

    #[test]
    fn m2_examples() {
        let s = spec(0.1, 0.04);
        assert!(m2_arithmetic(&level(3), &s, 1).unwrap().abs() < 1e-12);
        assert!(close(m2_arithmetic(&level(2), &s, 2).unwrap(), 1.375));
        assert!(close(m2_arithmetic(&increasing(2), &s, 2).unwrap(), 2.75));
        let g = PaymentPlan::geometric(1.0, 1.2, 2).unwrap();
        assert!(m2_geometric(&g, &s, 1).unwrap().abs() < 1e-12);
        assert!(close(m2_geometric(&g, &s, 2).unwrap(), 1.65));
        let g = PaymentPlan::geometric(1.0, 1.0, 2).unwrap();
        assert!(close(m2_geometric(&g, &s, 2).unwrap(), 1.375));
    }

    #[test]
    fn mean_squared_examples() {
        let s = spec(0.1, 0.04);
        assert!(close(mean_squared_arithmetic(&level(2), &s, 2).unwrap(), 5.3361));
        assert!(close(mean_squared_arithmetic(&increasing(2), &s, 2).unwrap(), 11.6281));
        let d = PaymentPlan::arithmetic(2.0, -1.0, 2).unwrap();
        assert!(close(mean_squared_arithmetic(&d, &s, 2).unwrap(), 12.3904));
        let g = PaymentPlan::geometric(1.0, 1.2, 2).unwrap();
        assert!(close(mean_squared_geometric(&g, &s, 2).unwrap(), 6.4009));
        let g = PaymentPlan::geometric(1.0, 1.0, 2).unwrap();
        assert!(close(mean_squared_geometric(&g, &s, 2).unwrap(), 5.3361));
        let g = PaymentPlan::geometric(2.0, 1.3, 3).unwrap();
        assert!(close(mean_squared_geometric(&g, &s, 1).unwrap(), 4.0 * 1.21));
    }

    #[test]
    fn variance_examples() {
        let s = spec(0.1, 0.04);
        let v = variance_arithmetic(&level(2), &s, 2).unwrap();
        assert!(close(v.value, 0.2264));
        assert_eq!(v.path, EvalPath::Closed);
        assert!(close(variance_arithmetic(&increasing(2), &s, 2).unwrap().value, 0.4344));
        let g = PaymentPlan::geometric(1.0, 1.2, 2).unwrap();
        assert!(close(variance_geometric(&g, &s, 2).unwrap().value, 0.2616));
        let g = PaymentPlan::geometric(1.0, 1.0, 2).unwrap();
        assert!(close(variance_geometric(&g, &s, 2).unwrap().value, 0.2264));
    }

    #[test]
    fn zero_rate_routes_to_recursion() {
        let s = spec(0.0, 0.01);
        let plan = increasing(5);
        let v = variance_arithmetic(&plan, &s, 5).unwrap();
        assert_eq!(v.path, EvalPath::Recursive);
        let rec = recursive_series(&plan, &s);
        assert_eq!(v.value, rec.rows[4].variance);
        assert_eq!(mean_squared_arithmetic(&plan, &s, 5).unwrap(), 15.0 * 15.0);
    }

    #[test]
    fn family_mismatch_and_range() {
        let s = spec(0.1, 0.04);
        let g = PaymentPlan::geometric(1.0, 1.2, 3).unwrap();
        assert!(m1_arithmetic(&g, &s, 2).is_err());
        assert!(variance_geometric(&level(3), &s, 2).is_err());
        assert!(mean_closed(&g, &s, 0).is_err());
        assert!(mean_closed(&g, &s, 4).is_err());
    }

    #[test]
    fn certify_rules() {
        let ok = certify_variance(Tracked { value: 0.5, error: 1e-13 }, 10.0, || Ok(9.0)).unwrap();
        assert_eq!(ok, Estimate { value: 0.5, path: EvalPath::Closed });
        let tiny = certify_variance(Tracked { value: -1e-14, error: 1e-16 }, 10.0, || Ok(9.0)).unwrap();
        assert_eq!(tiny, Estimate { value: 9.0, path: EvalPath::Recursive });
        let small = certify_variance(Tracked { value: 2e-3, error: 1e-13 }, 10.0, || Ok(9.0)).unwrap();
        assert_eq!(small.path, EvalPath::Recursive);
        let noisy = certify_variance(Tracked { value: 1e-3, error: 1e-5 }, 1e6, || Ok(7.0)).unwrap();
        assert_eq!(noisy, Estimate { value: 7.0, path: EvalPath::Recursive });
        let bad = certify_variance(Tracked { value: -1.0, error: 1e-12 }, 10.0, || Ok(0.0));
        assert!(matches!(bad, Err(Error::NumericalFailure(_))));
    }

    #[test]
    fn decomposition_holds() {
        let s = spec(0.05, 0.0025);
        for plan in [PaymentPlan::arithmetic(2.0, 0.5, 10).unwrap(), PaymentPlan::geometric(2.0, 1.05, 10).unwrap()] {
            for row in recursive_series(&plan, &s).rows {
                assert!(close(row.m1 + 2.0 * row.m2, row.second_moment));
                let gap = row.second_moment - row.mean * row.mean - row.variance;
                assert!(gap.abs() <= 1e-12 * row.second_moment);
            }
        }
    }
}
