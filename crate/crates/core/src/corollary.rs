//! Specialised closed forms for the four classic payment patterns: level,
//! increasing `1..k`, decreasing `n..n-k+1` and growing `(1+u)^(i-1)`.
//!
//! Each corollary is an algebraic specialisation of the general arithmetic or
//! geometric results. The general path is authoritative: whenever a
//! corollary formula is singular at the given rates, or its error bound is
//! wider than [`CERTIFIED_REL`], the general path's values are returned and
//! the result is tagged [`CorollaryPath::General`].

use serde::{Deserialize, Serialize};

use crate::closed::{self, RateTerms};
use crate::error::{Error, Result};
use crate::fixed::{self, near_zero_rate, Method};
use crate::moments::{self, certify_variance, CERTIFIED_REL};
use crate::plan::PaymentPlan;
use crate::rates::{GeometricAux, StochasticRateSpec};
use crate::scalar::{Scalar, Tracked};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorollaryPath {
    /// Every value came from the corollary's own closed form.
    Corollary,
    /// Values came from the general closed forms.
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelCorollary {
    pub mean: f64,
    pub variance: f64,
    pub path: CorollaryPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncreasingCorollary {
    pub mean: f64,
    pub m1: f64,
    pub m2: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub path: CorollaryPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecreasingCorollary {
    pub mean: f64,
    pub variance: f64,
    pub path: CorollaryPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCorollary {
    pub mean: f64,
    pub variance: f64,
    pub path: CorollaryPath,
}

fn certified(x: &Tracked) -> bool {
    x.certified(CERTIFIED_REL)
}

fn rates_singular(spec: &StochasticRateSpec) -> bool {
    near_zero_rate(spec.j) || near_zero_rate(spec.f) || near_zero_rate(spec.r)
}

fn rate_terms(spec: &StochasticRateSpec) -> RateTerms<Tracked> {
    RateTerms::new(spec.j, spec.s2)
}

/// Variance through the corollary formula, or `None` when the general path
/// must be used instead. A variance that rounding cannot explain becomes an
/// error rather than a silent fallback.
fn corollary_variance(raw: Tracked, second_moment: f64) -> Result<Option<f64>> {
    let checked = certify_variance(raw, second_moment, || Ok(f64::NAN))?;
    Ok(match checked.path {
        moments::EvalPath::Closed => Some(checked.value),
        moments::EvalPath::Recursive => None,
    })
}

/// Level payments of 1.
pub fn corollary_level(spec: &StochasticRateSpec, k: u32) -> Result<LevelCorollary> {
    let plan = PaymentPlan::arithmetic(1.0, 0.0, k)?;
    let general = || -> Result<LevelCorollary> {
        Ok(LevelCorollary {
            mean: moments::mean_closed(&plan, spec, k)?,
            variance: moments::variance_arithmetic(&plan, spec, k)?.value,
            path: CorollaryPath::General,
        })
    };
    if rates_singular(spec) {
        return general();
    }
    let mean = fixed::level_due(k, &spec.mean_rate(), Method::Auto);
    let raw = closed::level_variance(&rate_terms(spec), k);
    match corollary_variance(raw, raw.value + mean * mean)? {
        Some(variance) => Ok(LevelCorollary { mean, variance, path: CorollaryPath::Corollary }),
        None => general(),
    }
}

/// Payments `1, 2, ..., k`.
pub fn corollary_increasing(spec: &StochasticRateSpec, k: u32) -> Result<IncreasingCorollary> {
    let plan = PaymentPlan::arithmetic(1.0, 1.0, k)?;
    let general = || -> Result<IncreasingCorollary> {
        Ok(IncreasingCorollary {
            mean: moments::mean_closed(&plan, spec, k)?,
            m1: moments::m1_arithmetic(&plan, spec, k)?,
            m2: moments::m2_arithmetic(&plan, spec, k)?,
            second_moment: moments::second_moment_closed_arithmetic(&plan, spec, k)?,
            variance: moments::variance_arithmetic(&plan, spec, k)?.value,
            path: CorollaryPath::General,
        })
    };
    if rates_singular(spec) {
        return general();
    }
    let rates = rate_terms(spec);
    let mean = fixed::increasing_due(k, &spec.mean_rate(), Method::Auto);
    let m1 = closed::increasing_squared(&rates.f, k);
    let m2 = closed::increasing_m2(&rates, k);
    let second = closed::increasing_second_moment(&rates, k);
    if ![m1, m2, second].iter().all(certified) {
        return general();
    }
    match corollary_variance(closed::increasing_variance(&rates, k), second.value)? {
        Some(variance) => Ok(IncreasingCorollary {
            mean,
            m1: m1.value,
            m2: m2.value,
            second_moment: second.value,
            variance,
            path: CorollaryPath::Corollary,
        }),
        None => general(),
    }
}

/// Payments `n, n-1, ..., n-k+1`.
pub fn corollary_decreasing(spec: &StochasticRateSpec, n: u32, k: u32) -> Result<DecreasingCorollary> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("decreasing corollary needs 1 <= k <= n (k = {k}, n = {n})")));
    }
    let plan = PaymentPlan::arithmetic(f64::from(n), -1.0, k)?;
    let general = || -> Result<DecreasingCorollary> {
        Ok(DecreasingCorollary {
            mean: moments::mean_closed(&plan, spec, k)?,
            variance: moments::variance_arithmetic(&plan, spec, k)?.value,
            path: CorollaryPath::General,
        })
    };
    if rates_singular(spec) || near_zero_rate(spec.ell) {
        return general();
    }
    let mean = fixed::decreasing_due(n, k, &spec.mean_rate(), Method::Auto)?;
    let raw = closed::decreasing_variance(n, &rate_terms(spec), &Tracked::exact(spec.ell), k);
    match corollary_variance(raw, raw.value + mean * mean)? {
        Some(variance) => Ok(DecreasingCorollary { mean, variance, path: CorollaryPath::Corollary }),
        None => general(),
    }
}

/// Payments `1, 1+u, (1+u)^2, ...`.
pub fn corollary_growth(spec: &StochasticRateSpec, aux: &GeometricAux, k: u32) -> Result<GrowthCorollary> {
    let expected = GeometricAux::new(spec, aux.u)?;
    let consistent = [(aux.t, expected.t), (aux.h, expected.h), (aux.w, expected.w)]
        .iter()
        .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    if !consistent {
        return Err(Error::domain("auxiliary growth rates do not match the rate spec"));
    }
    let plan = PaymentPlan::geometric(1.0, 1.0 + aux.u, k)?;
    let general = || -> Result<GrowthCorollary> {
        Ok(GrowthCorollary {
            mean: moments::mean_closed(&plan, spec, k)?,
            variance: moments::variance_geometric(&plan, spec, k)?.value,
            path: CorollaryPath::General,
        })
    };
    if near_zero_rate(aux.t) || near_zero_rate(aux.h) || near_zero_rate(aux.w) {
        return general();
    }
    let mean = closed::growth(&Tracked::exact(spec.j), &Tracked::exact(aux.t), k);
    let raw = closed::growth_variance(
        &Tracked::exact(spec.j),
        &Tracked::exact(aux.u),
        &Tracked::exact(aux.t),
        &Tracked::exact(aux.h),
        &Tracked::exact(aux.w),
        k,
    );
    if !certified(&mean) {
        return general();
    }
    match corollary_variance(raw, raw.value + mean.to_f64().powi(2))? {
        Some(variance) => Ok(GrowthCorollary { mean: mean.value, variance, path: CorollaryPath::Corollary }),
        None => general(),
    }
}
