//! Exact expectations over every two-point rate path.
//!
//! With `i_k` equal to `j - s` or `j + s` with probability 1/2 each, the
//! accumulated value takes at most `2^k` values, all equally likely. Walking
//! the whole tree gives the exact moments of `C_k` up to binary64 rounding,
//! independently of any formula.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plan::PaymentPlan;
use crate::rates::StochasticRateSpec;

/// Largest horizon enumerated; `2^24` leaves is about 17 million paths.
pub const MAX_ENUMERATION_K: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactMoments {
    pub k: u32,
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

struct Walker<'a> {
    payments: &'a [f64],
    growth: &'a [f64],
    center: Option<&'a [f64]>,
    first: Vec<CompensatedSum>,
    second: Vec<CompensatedSum>,
}

impl Walker<'_> {
    /// Visits every node below `depth` with accumulated value `value`.
    fn walk(&mut self, depth: usize, value: f64) {
        if depth == self.payments.len() {
            return;
        }
        let base = value + self.payments[depth];
        for &g in self.growth {
            let next = g * base;
            match self.center {
                None => {
                    self.first[depth].add(next);
                    self.second[depth].add(next * next);
                }
                Some(means) => {
                    let dev = next - means[depth];
                    self.second[depth].add(dev * dev);
                }
            }
            self.walk(depth + 1, next);
        }
    }
}

fn check_support(spec: &StochasticRateSpec) -> Result<f64> {
    let s = spec.sd();
    if spec.j - s <= -1.0 {
        return Err(Error::domain(format!("two-point rate j - s = {} violates 1 + i > 0", spec.j - s)));
    }
    Ok(s)
}

/// Exact moments of `C_1, ..., C_k` under the two-point distribution.
pub fn enumerate_series(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<Vec<ExactMoments>> {
    if k > MAX_ENUMERATION_K {
        return Err(Error::BudgetExceeded { k, max: MAX_ENUMERATION_K });
    }
    plan.check_k(k)?;
    let s = check_support(spec)?;
    let payments: Vec<f64> = (1..=k).map(|i| plan.payment(i)).collect();
    let depth = k as usize;

    // With s2 = 0 both branches coincide; one path carries the whole mass.
    let growth: Vec<f64> = if s == 0.0 { vec![1.0 + spec.j] } else { vec![1.0 + spec.j - s, 1.0 + spec.j + s] };
    let mut walker = Walker {
        payments: &payments,
        growth: &growth,
        center: None,
        first: vec![CompensatedSum::default(); depth],
        second: vec![CompensatedSum::default(); depth],
    };
    walker.walk(0, 0.0);
    // Level d holds branches^(d+1) equally likely values; the scaling is exact.
    let branch_weight = 1.0 / growth.len() as f64;
    let weight = |d: usize| branch_weight.powi(d as i32 + 1);
    let means: Vec<f64> = (0..depth).map(|d| walker.first[d].total() * weight(d)).collect();
    let seconds: Vec<f64> = (0..depth).map(|d| walker.second[d].total() * weight(d)).collect();

    let mut centered = Walker {
        payments: &payments,
        growth: &growth,
        center: Some(&means),
        first: Vec::new(),
        second: vec![CompensatedSum::default(); depth],
    };
    centered.walk(0, 0.0);

    Ok((0..depth)
        .map(|d| ExactMoments {
            k: d as u32 + 1,
            mean: means[d],
            second_moment: seconds[d],
            variance: centered.second[d].total() * weight(d),
        })
        .collect())
}

/// Exact moments of `C_k` under the two-point distribution.
pub fn enumerate_exact(plan: &PaymentPlan, spec: &StochasticRateSpec, k: u32) -> Result<ExactMoments> {
    let series = enumerate_series(plan, spec, k)?;
    Ok(series[k as usize - 1])
}
