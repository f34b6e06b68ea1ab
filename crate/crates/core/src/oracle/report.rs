//! Comparison of analytic moments against oracle results.
//!
//! Enumeration results must match to a relative tolerance. Monte Carlo
//! results must put the analytic mean within `Z_MAX` standard errors and the
//! variance ratio within `1 +- BAND_WIDTH * SE_rel`. When a Monte Carlo
//! standard error is zero (all paths identical) the relative rule applies.
//! Every comparison stores the numbers its verdict was computed from.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::MomentSeries;
use crate::oracle::distribution::DistributionKind;
use crate::oracle::enumerate::ExactMoments;
use crate::oracle::simulate::SimEstimate;

/// Relative tolerance for exact-oracle comparisons.
pub const ENUMERATION_REL_TOL: f64 = 1e-9;
/// Largest admissible `|z|` for a Monte Carlo mean.
pub const Z_MAX: f64 = 4.0;
/// Half-width of the variance-ratio band in units of `SE_rel`.
pub const BAND_WIDTH: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "distribution", rename_all = "kebab-case")]
pub enum OracleKind {
    Enumeration,
    MonteCarlo(DistributionKind),
}

impl std::fmt::Display for OracleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OracleKind::Enumeration => f.write_str("enumeration"),
            OracleKind::MonteCarlo(kind) => write!(f, "monte-carlo/{kind}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OraclePoint {
    pub k: u32,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: Option<f64>,
    pub se_variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSeries {
    pub kind: OracleKind,
    pub points: Vec<OraclePoint>,
}

impl OracleSeries {
    pub fn from_enumeration(exact: &[ExactMoments]) -> Self {
        let points = exact
            .iter()
            .map(|e| OraclePoint { k: e.k, mean: e.mean, variance: e.variance, se_mean: None, se_variance: None })
            .collect();
        OracleSeries { kind: OracleKind::Enumeration, points }
    }

    pub fn from_simulation(kind: DistributionKind, estimates: &[SimEstimate]) -> Self {
        let points = estimates
            .iter()
            .map(|e| OraclePoint {
                k: e.k,
                mean: e.mean,
                variance: e.variance,
                se_mean: e.se_mean,
                se_variance: e.se_variance,
            })
            .collect();
        OracleSeries { kind: OracleKind::MonteCarlo(kind), points }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(&self) -> bool {
        *self == Verdict::Pass
    }
}

/// The rule a comparison was judged by.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Rule {
    Relative { tolerance: f64 },
    Statistical { z_max: f64, band_width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub oracle: OracleKind,
    pub k: u32,
    pub analytic_mean: f64,
    pub oracle_mean: f64,
    pub abs_dev_mean: f64,
    pub rel_dev_mean: f64,
    pub analytic_variance: f64,
    pub oracle_variance: f64,
    pub abs_dev_variance: f64,
    pub rel_dev_variance: f64,
    pub se_mean: Option<f64>,
    pub z_mean: Option<f64>,
    pub se_variance: Option<f64>,
    pub variance_ratio: Option<f64>,
    /// `[lower, upper]` bounds for `variance_ratio`.
    pub variance_band: Option<[f64; 2]>,
    pub mean_rule: Rule,
    pub variance_rule: Rule,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub comparisons: Vec<Comparison>,
    pub verdict: Verdict,
}

impl OracleReport {
    pub fn failures(&self) -> impl Iterator<Item = &Comparison> {
        self.comparisons.iter().filter(|c| !c.verdict.passed())
    }
}

/// `|a - b| / max(|a|, |b|)`, defined as 0 when both are 0.
pub fn relative_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn relative_rule() -> Rule {
    Rule::Relative { tolerance: ENUMERATION_REL_TOL }
}

fn statistical_rule() -> Rule {
    Rule::Statistical { z_max: Z_MAX, band_width: BAND_WIDTH }
}

fn positive(se: Option<f64>) -> Option<f64> {
    se.filter(|s| *s > 0.0 && s.is_finite())
}

fn judge(oracle: OracleKind, k: u32, analytic_mean: f64, analytic_variance: f64, point: &OraclePoint) -> Comparison {
    let rel_dev_mean = relative_deviation(analytic_mean, point.mean);
    let rel_dev_variance = relative_deviation(analytic_variance, point.variance);
    let relative_ok = |rel: f64| rel <= ENUMERATION_REL_TOL;
    let monte_carlo = matches!(oracle, OracleKind::MonteCarlo(_));

    let se_mean = if monte_carlo { positive(point.se_mean) } else { None };
    let z_mean = se_mean.map(|se| (point.mean - analytic_mean) / se);
    let (mean_rule, mean_ok) = match z_mean {
        Some(z) => (statistical_rule(), z.abs() <= Z_MAX),
        None => (relative_rule(), relative_ok(rel_dev_mean)),
    };

    let se_variance = if monte_carlo && analytic_variance > 0.0 { positive(point.se_variance) } else { None };
    let (variance_ratio, variance_band) = match se_variance {
        Some(se) => {
            let se_rel = se / analytic_variance;
            (Some(point.variance / analytic_variance), Some([1.0 - BAND_WIDTH * se_rel, 1.0 + BAND_WIDTH * se_rel]))
        }
        None => (None, None),
    };
    let (variance_rule, variance_ok) = match (variance_ratio, variance_band) {
        (Some(ratio), Some([lo, hi])) => (statistical_rule(), lo <= ratio && ratio <= hi),
        _ => (relative_rule(), relative_ok(rel_dev_variance)),
    };

    Comparison {
        oracle,
        k,
        analytic_mean,
        oracle_mean: point.mean,
        abs_dev_mean: (point.mean - analytic_mean).abs(),
        rel_dev_mean,
        analytic_variance,
        oracle_variance: point.variance,
        abs_dev_variance: (point.variance - analytic_variance).abs(),
        rel_dev_variance,
        se_mean,
        z_mean,
        se_variance,
        variance_ratio,
        variance_band,
        mean_rule,
        variance_rule,
        verdict: Verdict::from_bool(mean_ok && variance_ok),
    }
}

/// Compares every oracle point with the analytic row of the same `k`.
pub fn compare(analytic: &MomentSeries, oracles: &[OracleSeries]) -> Result<OracleReport> {
    let mut comparisons = Vec::new();
    for series in oracles {
        if series.points.len() != analytic.len() {
            return Err(Error::ShapeMismatch { analytic: analytic.len(), oracle: series.points.len() });
        }
        for (row, point) in analytic.rows.iter().zip(&series.points) {
            if row.k != point.k {
                return Err(Error::ShapeMismatch { analytic: row.k as usize, oracle: point.k as usize });
            }
            comparisons.push(judge(series.kind, row.k, row.mean, row.variance, point));
        }
    }
    let verdict = Verdict::from_bool(comparisons.iter().all(|c| c.verdict.passed()));
    Ok(OracleReport { comparisons, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::MomentRow;

    fn analytic(mean: f64, variance: f64) -> MomentSeries {
        MomentSeries {
            rows: vec![MomentRow { k: 1, mean, second_moment: variance + mean * mean, variance, m1: 0.0, m2: 0.0 }],
        }
    }

    fn exact(mean: f64, variance: f64) -> OracleSeries {
        OracleSeries {
            kind: OracleKind::Enumeration,
            points: vec![OraclePoint { k: 1, mean, variance, se_mean: None, se_variance: None }],
        }
    }

    #[test]
    fn enumeration_rule() {
        let report = compare(&analytic(2.31, 0.2264), &[exact(2.31, 0.2264)]).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        let report = compare(&analytic(2.31, 0.2264), &[exact(2.31, 0.3)]).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        assert!((report.comparisons[0].rel_dev_variance - 0.0736 / 0.3).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_rule() {
        let point = OraclePoint { k: 1, mean: 2.309, variance: 0.2264, se_mean: Some(0.001), se_variance: Some(0.001) };
        let series = OracleSeries { kind: OracleKind::MonteCarlo(DistributionKind::Uniform), points: vec![point] };
        let report = compare(&analytic(2.31, 0.2264), std::slice::from_ref(&series)).unwrap();
        let c = report.comparisons[0];
        assert!((c.z_mean.unwrap() + 1.0).abs() < 1e-9);
        assert_eq!(report.verdict, Verdict::Pass);

        let mut far = series;
        far.points[0].mean = 2.3;
        assert_eq!(compare(&analytic(2.31, 0.2264), &[far.clone()]).unwrap().verdict, Verdict::Fail);
        far.points[0].mean = 2.31;
        far.points[0].variance = 0.2264 + 0.0061;
        assert_eq!(compare(&analytic(2.31, 0.2264), &[far]).unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn zero_standard_error_falls_back_to_relative() {
        let point = OraclePoint { k: 1, mean: 2.31, variance: 0.0, se_mean: Some(0.0), se_variance: Some(0.0) };
        let series = OracleSeries { kind: OracleKind::MonteCarlo(DistributionKind::TwoPoint), points: vec![point] };
        let report = compare(&analytic(2.31, 0.0), &[series]).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert_eq!(report.comparisons[0].mean_rule, relative_rule());
    }

    #[test]
    fn shape_mismatch() {
        let mut two = analytic(1.0, 0.0);
        two.rows.push(MomentRow { k: 2, ..two.rows[0] });
        assert_eq!(compare(&two, &[exact(1.0, 0.0)]), Err(Error::ShapeMismatch { analytic: 2, oracle: 1 }));
    }
}
