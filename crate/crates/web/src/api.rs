//! JSON-in, JSON-out operations behind the browser bindings.

use annuity_core::fixed::{Accumulator, AccumulatorKind};
use annuity_core::moments::analytic_series;
use annuity_core::oracle::{
    compare, path_rates, simulate_series, OracleReport, OracleSeries, RateDistribution, SimConfig,
};
use annuity_core::{EvalPath, Family, FixedRate, Method, PaymentCheck, PaymentPlan, StochasticRateSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Longest horizon the page may request.
pub const MAX_N: u32 = 600;
/// Simulation limits, chosen to keep a run under a second or two in a browser.
pub const MAX_SIM_N: u32 = 60;
pub const MAX_PATHS: u64 = 100_000;
pub const MAX_BINS: usize = 200;

#[derive(Debug, Error)]
pub enum WebError {
    #[error("bad request: {0}")]
    Request(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] annuity_core::Error),
    #[error("{0}")]
    Limit(String),
}

pub type Result<T, E = WebError> = std::result::Result<T, E>;

/// A payment plan and rate spec. `family` is `level`, `increasing`,
/// `decreasing`, `arithmetic` (`p`, `q` = difference) or `geometric`
/// (`p`, `q` = ratio).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanInput {
    pub family: String,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub n: u32,
    pub j: f64,
    #[serde(default)]
    pub s2: f64,
}

impl PlanInput {
    fn resolve(&self, max_n: u32) -> Result<(PaymentPlan, StochasticRateSpec)> {
        if self.n > max_n {
            return Err(WebError::Limit(format!("n = {} exceeds the demo limit of {max_n}", self.n)));
        }
        let spec = StochasticRateSpec::new(self.j, self.s2)?;
        let plan = match PaymentPlan::named(&self.family, self.n) {
            Some(plan) => plan?,
            None => {
                let family: Family = self.family.parse()?;
                let q = self.q.unwrap_or(if family == Family::Geometric { 1.0 } else { 0.0 });
                PaymentPlan::new(family, self.p.unwrap_or(1.0), q, self.n, PaymentCheck::Strict)?
            }
        };
        Ok((plan, spec))
    }
}

#[derive(Debug, Serialize)]
pub struct CurvePoint {
    pub k: u32,
    pub payment: f64,
    pub mean: f64,
    pub sd: f64,
    pub variance: f64,
    pub variance_path: EvalPath,
}

#[derive(Debug, Serialize)]
pub struct Curves {
    pub plan: PaymentPlan,
    pub spec: StochasticRateSpec,
    pub rows: Vec<CurvePoint>,
}

pub fn moment_curves(input: &str) -> Result<String> {
    let input: PlanInput = serde_json::from_str(input)?;
    let (plan, spec) = input.resolve(MAX_N)?;
    let series = analytic_series(&plan, &spec, Method::Auto)?;
    let rows = series
        .rows
        .iter()
        .map(|r| {
            let path = annuity_core::moments::variance(&plan, &spec, r.k).map(|v| v.path)?;
            Ok(CurvePoint {
                k: r.k,
                payment: plan.payment(r.k),
                mean: r.mean,
                sd: r.variance.sqrt(),
                variance: r.variance,
                variance_path: path,
            })
        })
        .collect::<Result<_>>()?;
    Ok(serde_json::to_string(&Curves { plan, spec, rows })?)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedInput {
    pub n: u32,
    pub j: f64,
}

#[derive(Debug, Serialize)]
pub struct FixedRow {
    pub k: u32,
    pub level: f64,
    pub increasing: f64,
    pub increasing_sq: f64,
    pub decreasing: f64,
}

#[derive(Debug, Serialize)]
pub struct FixedTable {
    pub rate: FixedRate,
    pub n: u32,
    pub rows: Vec<FixedRow>,
}

pub fn fixed_table(input: &str) -> Result<String> {
    let input: FixedInput = serde_json::from_str(input)?;
    if input.n == 0 || input.n > MAX_N {
        return Err(WebError::Limit(format!("n must lie in 1..={MAX_N}")));
    }
    let rate = FixedRate::new(input.j)?;
    let value = |kind, k| Accumulator::new(kind, rate).value(k, Method::Auto);
    let rows = (1..=input.n)
        .map(|k| {
            Ok(FixedRow {
                k,
                level: value(AccumulatorKind::Level, k)?,
                increasing: value(AccumulatorKind::Increasing, k)?,
                increasing_sq: value(AccumulatorKind::IncreasingSquared, k)?,
                decreasing: value(AccumulatorKind::Decreasing { n: input.n }, k)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(serde_json::to_string(&FixedTable { rate, n: input.n, rows })?)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimInput {
    pub plan: PlanInput,
    pub distribution: String,
    pub paths: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_seed() -> u64 {
    1
}

fn default_bins() -> usize {
    40
}

/// Equal-width bins over `[lo, hi]`.
#[derive(Debug, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut counts = vec![0; bins];
        let width = (hi - lo) / bins as f64;
        for &x in values {
            let slot = if width > 0.0 { ((x - lo) / width) as usize } else { 0 };
            counts[slot.min(bins - 1)] += 1;
        }
        Histogram { lo, hi, counts }
    }
}

#[derive(Debug, Serialize)]
pub struct Simulation {
    pub distribution: String,
    pub paths: u64,
    pub seed: u64,
    /// Analytic mean and standard deviation of `C_n`.
    pub mean: f64,
    pub sd: f64,
    /// Simulated values of `C_n`.
    pub histogram: Histogram,
    /// Simulation against the analytic moments for every `k`.
    pub report: OracleReport,
}

pub fn simulate(input: &str) -> Result<String> {
    let input: SimInput = serde_json::from_str(input)?;
    let (plan, spec) = input.plan.resolve(MAX_SIM_N)?;
    if input.paths > MAX_PATHS {
        return Err(WebError::Limit(format!("paths must not exceed {MAX_PATHS}")));
    }
    if input.bins == 0 || input.bins > MAX_BINS {
        return Err(WebError::Limit(format!("bins must lie in 1..={MAX_BINS}")));
    }
    let kind = input.distribution.parse()?;
    let dist = RateDistribution::new(kind, &spec)?;
    let config = SimConfig::new(input.paths, input.seed, 1)?;

    let analytic = analytic_series(&plan, &spec, Method::Auto)?;
    let estimates = simulate_series(&plan, &dist, &config, plan.n)?;
    let report = compare(&analytic, &[OracleSeries::from_simulation(kind, &estimates)])?;

    // The same rate streams as the simulation, so the histogram shows the
    // very paths behind the reported estimate.
    let payments: Vec<f64> = (1..=plan.n).map(|i| plan.payment(i)).collect();
    let values: Vec<f64> = (0..input.paths)
        .map(|index| {
            let rates = path_rates(&dist, input.seed, index, plan.n);
            rates.iter().zip(&payments).fold(0.0, |c, (i, p)| (1.0 + i) * (c + p))
        })
        .collect();

    let last = analytic.rows.last().expect("n >= 1");
    Ok(serde_json::to_string(&Simulation {
        distribution: kind.name().to_string(),
        paths: input.paths,
        seed: input.seed,
        mean: last.mean,
        sd: last.variance.sqrt(),
        histogram: Histogram::new(&values, input.bins),
        report,
    })?)
}
