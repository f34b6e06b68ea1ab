//! Annual-rate distributions matched to a given mean `j` and variance `s2`.

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::StochasticRateSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    /// `j - s` or `j + s`, each with probability 1/2.
    TwoPoint,
    /// Uniform on `[j - sqrt(3) s, j + sqrt(3) s]`.
    Uniform,
    /// `1 + i` lognormal with mean `1 + j` and variance `s2`.
    ShiftedLognormal,
}

impl DistributionKind {
    pub const ALL: [DistributionKind; 3] =
        [DistributionKind::TwoPoint, DistributionKind::Uniform, DistributionKind::ShiftedLognormal];

    pub fn name(&self) -> &'static str {
        match self {
            DistributionKind::TwoPoint => "two-point",
            DistributionKind::Uniform => "uniform",
            DistributionKind::ShiftedLognormal => "shifted-lognormal",
        }
    }
}

impl std::fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DistributionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-point" => Ok(DistributionKind::TwoPoint),
            "uniform" => Ok(DistributionKind::Uniform),
            "shifted-lognormal" | "lognormal" => Ok(DistributionKind::ShiftedLognormal),
            other => Err(Error::domain(format!("unknown rate distribution {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Sampler {
    Constant(f64),
    TwoPoint { low: f64, high: f64 },
    Uniform { low: f64, width: f64 },
    Lognormal(LogNormal<f64>),
}

/// An annual-rate distribution matched to the first two moments of a spec.
#[derive(Debug, Clone, Copy)]
pub struct RateDistribution {
    pub kind: DistributionKind,
    pub j: f64,
    pub s2: f64,
    sampler: Sampler,
}

impl RateDistribution {
    pub fn new(kind: DistributionKind, spec: &StochasticRateSpec) -> Result<Self> {
        let (j, s2) = (spec.j, spec.s2);
        let s = s2.sqrt();
        let sampler = if s2 == 0.0 {
            Sampler::Constant(j)
        } else {
            match kind {
                DistributionKind::TwoPoint => {
                    if j - s <= -1.0 {
                        return Err(Error::domain(format!("two-point rate j - s = {} violates 1 + i > 0", j - s)));
                    }
                    Sampler::TwoPoint { low: j - s, high: j + s }
                }
                DistributionKind::Uniform => {
                    let half = 3f64.sqrt() * s;
                    if j - half <= -1.0 {
                        return Err(Error::domain(format!(
                            "uniform rate support starts at {}, violating 1 + i > 0",
                            j - half
                        )));
                    }
                    Sampler::Uniform { low: j - half, width: 2.0 * half }
                }
                DistributionKind::ShiftedLognormal => {
                    let (location, scale2) = lognormal_parameters(j, s2);
                    let dist = LogNormal::new(location, scale2.sqrt())
                        .map_err(|e| Error::InvalidConfig(format!("lognormal parameters: {e}")))?;
                    Sampler::Lognormal(dist)
                }
            }
        };
        Ok(RateDistribution { kind, j, s2, sampler })
    }

    /// Draws one annual rate `i`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.sampler {
            Sampler::Constant(j) => j,
            Sampler::TwoPoint { low, high } => {
                if rng.random::<bool>() {
                    high
                } else {
                    low
                }
            }
            Sampler::Uniform { low, width } => low + width * rng.random::<f64>(),
            Sampler::Lognormal(dist) => dist.sample(rng) - 1.0,
        }
    }

    /// Mean of the rate implied by the constructed parameters.
    pub fn mean(&self) -> f64 {
        match self.sampler {
            Sampler::Constant(j) => j,
            Sampler::TwoPoint { low, high } => 0.5 * (low + high),
            Sampler::Uniform { low, width } => low + 0.5 * width,
            Sampler::Lognormal(_) => {
                let (location, scale2) = lognormal_parameters(self.j, self.s2);
                (location + 0.5 * scale2).exp() - 1.0
            }
        }
    }

    /// Variance of the rate implied by the constructed parameters.
    pub fn variance(&self) -> f64 {
        match self.sampler {
            Sampler::Constant(_) => 0.0,
            Sampler::TwoPoint { low, high } => 0.25 * (high - low).powi(2),
            Sampler::Uniform { width, .. } => width * width / 12.0,
            Sampler::Lognormal(_) => {
                let (location, scale2) = lognormal_parameters(self.j, self.s2);
                scale2.exp_m1() * (2.0 * location + scale2).exp()
            }
        }
    }
}

/// `(mu_L, sigma_L^2)` of `ln(1 + i)` so that `1 + i` has mean `1 + j` and variance `s2`.
pub fn lognormal_parameters(j: f64, s2: f64) -> (f64, f64) {
    let scale2 = (s2 / ((1.0 + j) * (1.0 + j))).ln_1p();
    (j.ln_1p() - 0.5 * scale2, scale2)
}
