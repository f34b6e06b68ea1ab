//! Seeded Monte Carlo estimates of the moments of `C_k`.
//!
//! Path `i` draws its rates from ChaCha8 stream `i` under the configured
//! seed, so every path's rates are fixed by `(seed, i)` alone. Paths are
//! grouped into fixed-size blocks; block statistics are merged in block
//! order, which makes the estimates bit-identical for any worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::distribution::RateDistribution;
use crate::plan::PaymentPlan;

/// Paths per block; the unit of parallel work and of merging.
pub const BLOCK_PATHS: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub paths: u64,
    pub seed: u64,
    /// Thread count hint; does not affect results.
    pub workers: usize,
}

impl SimConfig {
    pub fn new(paths: u64, seed: u64, workers: usize) -> Result<Self> {
        let config = SimConfig { paths, seed, workers };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::InvalidConfig("paths must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sample moments of `C_k` over the simulated paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub k: u32,
    pub paths: u64,
    pub mean: f64,
    /// Unbiased sample variance (`n - 1` denominator); 0 for a single path.
    pub variance: f64,
    /// Standard error of the mean; `None` with fewer than 2 paths.
    pub se_mean: Option<f64>,
    /// Normal-theory standard error of the sample variance; `None` with
    /// fewer than 4 paths.
    pub se_variance: Option<f64>,
}

/// Streaming central moments up to order four, mergeable in any fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments4 {
    n: f64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments4 {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n;
        self.n += 1.0;
        let n = self.n;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term = delta * dn * n1;
        self.mean += dn;
        self.m4 += term * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += term * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += term;
    }

    pub fn merge(&mut self, other: &Moments4) {
        if other.n == 0.0 {
            return;
        }
        if self.n == 0.0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.n, other.n);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;
        let m4 = self.m4
            + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        let m3 = self.m3
            + other.m3
            + d2 * delta * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        self.m2 += other.m2 + d2 * na * nb / n;
        self.mean += delta * nb / n;
        self.m3 = m3;
        self.m4 = m4;
        self.n = n;
    }

    pub fn count(&self) -> f64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; 0 with fewer than 2 observations.
    pub fn sample_variance(&self) -> f64 {
        if self.n < 2.0 {
            0.0
        } else {
            self.m2 / (self.n - 1.0)
        }
    }

    /// Biased central fourth moment.
    pub fn fourth_central(&self) -> f64 {
        if self.n == 0.0 {
            0.0
        } else {
            self.m4 / self.n
        }
    }

    fn estimate(&self, k: u32, paths: u64) -> SimEstimate {
        let n = self.n;
        let variance = self.sample_variance();
        let se_mean = (n >= 2.0).then(|| (variance / n).sqrt());
        let se_variance = (n >= 4.0).then(|| {
            let excess = self.fourth_central() - (n - 3.0) / (n - 1.0) * variance * variance;
            (excess.max(0.0) / n).sqrt()
        });
        SimEstimate { k, paths, mean: self.mean, variance, se_mean, se_variance }
    }
}

fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// The `k` annual rates drawn for path `index`.
pub fn path_rates(dist: &RateDistribution, seed: u64, index: u64, k: u32) -> Vec<f64> {
    let mut rng = path_rng(seed, index);
    (0..k).map(|_| dist.sample(&mut rng)).collect()
}

fn run_block(payments: &[f64], dist: &RateDistribution, seed: u64, start: u64, end: u64) -> Vec<Moments4> {
    let mut acc = vec![Moments4::default(); payments.len()];
    for index in start..end {
        let mut rng = path_rng(seed, index);
        let mut value = 0.0;
        for (slot, payment) in acc.iter_mut().zip(payments) {
            value = (1.0 + dist.sample(&mut rng)) * (value + payment);
            slot.push(value);
        }
    }
    acc
}

#[cfg(feature = "parallel")]
fn run_blocks(
    payments: &[f64],
    dist: &RateDistribution,
    config: &SimConfig,
    blocks: u64,
) -> Result<Vec<Vec<Moments4>>> {
    use rayon::prelude::*;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let start = b * BLOCK_PATHS;
                let end = (start + BLOCK_PATHS).min(config.paths);
                run_block(payments, dist, config.seed, start, end)
            })
            .collect()
    }))
}

#[cfg(not(feature = "parallel"))]
fn run_blocks(
    payments: &[f64],
    dist: &RateDistribution,
    config: &SimConfig,
    blocks: u64,
) -> Result<Vec<Vec<Moments4>>> {
    Ok((0..blocks)
        .map(|b| {
            let start = b * BLOCK_PATHS;
            let end = (start + BLOCK_PATHS).min(config.paths);
            run_block(payments, dist, config.seed, start, end)
        })
        .collect())
}

/// Sample moments of `C_1, ..., C_k`.
pub fn simulate_series(
    plan: &PaymentPlan,
    dist: &RateDistribution,
    config: &SimConfig,
    k: u32,
) -> Result<Vec<SimEstimate>> {
    config.validate()?;
    plan.check_k(k)?;
    let payments: Vec<f64> = (1..=k).map(|i| plan.payment(i)).collect();
    let blocks = config.paths.div_ceil(BLOCK_PATHS);
    let results = run_blocks(&payments, dist, config, blocks)?;

    let mut total = vec![Moments4::default(); payments.len()];
    for block in &results {
        for (t, b) in total.iter_mut().zip(block) {
            t.merge(b);
        }
    }
    Ok(total.iter().enumerate().map(|(d, m)| m.estimate(d as u32 + 1, config.paths)).collect())
}

/// Sample moments of `C_k`.
pub fn simulate(plan: &PaymentPlan, dist: &RateDistribution, config: &SimConfig, k: u32) -> Result<SimEstimate> {
    let series = simulate_series(plan, dist, config, k)?;
    Ok(series[k as usize - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::distribution::DistributionKind;
    use crate::rates::StochasticRateSpec;

    #[test]
    fn moments4_matches_two_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37 % 101) as f64).sqrt() + 3.0).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;

        let mut whole = Moments4::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut left = Moments4::default();
        let mut right = Moments4::default();
        xs[..313].iter().for_each(|&x| left.push(x));
        xs[313..].iter().for_each(|&x| right.push(x));
        left.merge(&right);

        for m in [whole, left] {
            assert!((m.mean() - mean).abs() < 1e-12 * mean);
            assert!((m.sample_variance() - var).abs() < 1e-10 * var);
            assert!((m.fourth_central() - m4).abs() < 1e-9 * m4);
        }
    }

    #[test]
    fn single_path_is_the_recursion() {
        let spec = StochasticRateSpec::new(0.05, 0.01).unwrap();
        let plan = PaymentPlan::arithmetic(1.0, 0.5, 6).unwrap();
        let dist = RateDistribution::new(DistributionKind::Uniform, &spec).unwrap();
        let config = SimConfig::new(1, 99, 1).unwrap();
        let est = simulate(&plan, &dist, &config, 6).unwrap();
        let rates = path_rates(&dist, 99, 0, 6);
        let mut c = 0.0;
        for (i, r) in rates.iter().enumerate() {
            c = (1.0 + r) * (c + plan.payment(i as u32 + 1));
        }
        assert_eq!(est.mean, c);
        assert_eq!(est.variance, 0.0);
        assert_eq!(est.se_mean, None);
    }

    #[test]
    fn invalid_config() {
        assert!(SimConfig::new(0, 1, 1).is_err());
        assert!(SimConfig::new(1, 1, 0).is_err());
    }
}
