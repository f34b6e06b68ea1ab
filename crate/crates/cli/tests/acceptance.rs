//! Acceptance criteria, one pass/fail line each, at the pinned tolerances.
//!
//! Runs as a plain binary (`harness = false`) so every line is printed in
//! order; the process exits nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use annuity_core::fixed::{self, Method, PaymentCheck};
use annuity_core::identities::{deviation, direct_sum, fixed_identities, stochastic_invariants, IdentityGrid};
use annuity_core::moments::{analytic_series, raw_closed_variance, recursive_series};
use annuity_core::oracle::{
    compare, enumerate_series, relative_deviation, simulate, DistributionKind, OraclePoint, OracleSeries,
    RateDistribution, SimConfig,
};
use annuity_core::{FixedRate, MomentSeries, PaymentPlan, StochasticRateSpec};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn spec(j: f64, s2: f64) -> StochasticRateSpec {
    StochasticRateSpec::new(j, s2).expect("valid spec")
}

/// 1. Hand-enumerated anchors at j = 0.1, s2 = 0.04, k = 2.
fn anchors() -> Outcome {
    let s = spec(0.1, 0.04);
    let cases = [
        ("level", PaymentPlan::arithmetic(1.0, 0.0, 2).unwrap(), 2.31, 0.2264),
        ("increasing", PaymentPlan::arithmetic(1.0, 1.0, 2).unwrap(), 3.41, 0.4344),
        ("decreasing", PaymentPlan::arithmetic(2.0, -1.0, 2).unwrap(), 3.52, 0.6096),
        ("geometric", PaymentPlan::geometric(1.0, 1.2, 2).unwrap(), 2.53, 0.2616),
    ];
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for (name, plan, mean, var) in cases {
        let analytic = analytic_series(&plan, &s, Method::Auto).unwrap().rows[1];
        let exact = enumerate_series(&plan, &s, 2).unwrap()[1];
        let devs = [
            relative_deviation(analytic.mean, mean),
            relative_deviation(analytic.variance, var),
            relative_deviation(exact.mean, mean),
            relative_deviation(exact.variance, var),
            relative_deviation(analytic.variance, exact.variance),
        ];
        let dev = devs.into_iter().fold(0.0, f64::max);
        worst = worst.max(dev);
        if dev > 1e-10 {
            bad.push(name);
        }
    }
    outcome(bad.is_empty(), format!("4 anchors, max rel dev {worst:.2e} (tol 1e-10) {bad:?}"))
}

/// 2. Closed forms against the recursions over the standard grid.
fn closed_vs_recursion(grid: &IdentityGrid) -> Outcome {
    let checks = stochastic_invariants(grid).unwrap();
    let wanted = ["mean:", "M1:", "M2:", "second moment:", "squared mean:", "variance: closed"];
    let selected: Vec<_> = checks.iter().filter(|c| wanted.iter().any(|w| c.name.starts_with(w))).collect();
    let cases: usize = selected.iter().map(|c| c.cases).sum();
    let worst = selected.iter().map(|c| c.max_deviation).fold(0.0, f64::max);
    let passed = selected.len() == wanted.len() && selected.iter().all(|c| c.passed && c.tolerance <= 1e-9);
    let variance = selected.iter().find(|c| c.name.starts_with("variance")).expect("variance check");

    // The uncertified closed variance, for transparency.
    let mut raw_worst: f64 = 0.0;
    for &j in &grid.stochastic_rates {
        for &s2 in &grid.variances {
            let s = spec(j, s2);
            for plan in grid.plans(grid.stochastic_k_max) {
                let rec = recursive_series(&plan, &s);
                for row in &rec.rows {
                    if let Some(raw) = raw_closed_variance(&plan, &s, row.k).unwrap() {
                        raw_worst = raw_worst.max(deviation(raw.value, row.variance));
                    }
                }
            }
        }
    }
    let per_family = grid.stochastic_rates.len() * grid.variances.len() * grid.stochastic_k_max as usize * 12;
    outcome(
        passed,
        format!(
            "{} forms, {cases} cases ({per_family} per family and form), max dev {worst:.2e} (tol 1e-9); \
             variance via recursion fallback in {}/{} cases, uncertified closed variance max dev {raw_worst:.2e}",
            selected.len(),
            variance.fallback_cases,
            variance.cases
        ),
    )
}

/// 3. Corollaries against the general closed forms.
fn corollary_coherence(grid: &IdentityGrid) -> Outcome {
    let checks = stochastic_invariants(grid).unwrap();
    let selected: Vec<_> = checks.iter().filter(|c| c.name.contains("corollary")).collect();
    let cases: usize = selected.iter().map(|c| c.cases).sum();
    let worst = selected.iter().map(|c| c.max_deviation).fold(0.0, f64::max);
    let passed = selected.len() == 4 && selected.iter().all(|c| c.passed && c.tolerance <= 1e-10);
    outcome(passed, format!("{} corollaries, {cases} cases, max dev {worst:.2e} (tol 1e-10)", selected.len()))
}

/// 4. Exact two-point enumeration against the analytic moments, k <= 12.
fn enumeration_equivalence(grid: &IdentityGrid) -> Outcome {
    let k = 12;
    let mut plans: Vec<PaymentPlan> =
        grid.plans(k).into_iter().filter(|p| (1..=k).all(|i| p.payment(i) > 0.0)).collect();
    plans.push(PaymentPlan::arithmetic(f64::from(k), -1.0, k).unwrap());
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut failures = 0;
    for &j in &grid.stochastic_rates {
        for &s2 in &grid.variances {
            let s = spec(j, s2);
            for plan in &plans {
                let analytic = analytic_series(plan, &s, Method::Auto).unwrap();
                let exact = enumerate_series(plan, &s, k).unwrap();
                for (row, e) in analytic.rows.iter().zip(&exact) {
                    let dev = [
                        relative_deviation(row.mean, e.mean),
                        relative_deviation(row.second_moment, e.second_moment),
                        relative_deviation(row.variance, e.variance),
                    ]
                    .into_iter()
                    .fold(0.0, f64::max);
                    worst = worst.max(dev);
                    cases += 1;
                    if dev > 1e-10 {
                        failures += 1;
                    }
                }
            }
        }
    }
    outcome(
        failures == 0,
        format!(
            "{} plans, {cases} (plan, j, s2, k) cases, {failures} over tol, max rel dev {worst:.2e} (tol 1e-10)",
            plans.len()
        ),
    )
}

/// 5. Monte Carlo under uniform and shifted-lognormal rates, 10^6 paths.
fn distribution_freeness() -> Outcome {
    let plans = [
        PaymentPlan::arithmetic(1.0, 0.0, 20).unwrap(),
        PaymentPlan::arithmetic(1.0, 1.0, 20).unwrap(),
        PaymentPlan::arithmetic(20.0, -1.0, 20).unwrap(),
        PaymentPlan::geometric(1.0, 1.2, 20).unwrap(),
        PaymentPlan::geometric(2.0, 0.95, 20).unwrap(),
    ];
    let specs = [spec(0.05, 0.0025), spec(0.1, 0.04)];
    let horizons = [5, 20];
    let config = SimConfig::new(1_000_000, 20_250_101, 1).unwrap();
    let mut combos = 0;
    let mut comparisons = 0;
    let mut failed = Vec::new();
    let mut worst_z: f64 = 0.0;
    let mut worst_band: f64 = 0.0;
    for plan in &plans {
        for s in &specs {
            for &k in &horizons {
                combos += 1;
                let row = analytic_series(plan, s, Method::Auto).unwrap().rows[k as usize - 1];
                let analytic = MomentSeries { rows: vec![annuity_core::MomentRow { k: 1, ..row }] };
                for kind in [DistributionKind::Uniform, DistributionKind::ShiftedLognormal] {
                    let dist = RateDistribution::new(kind, s).unwrap();
                    let est = simulate(plan, &dist, &config, k).unwrap();
                    let point = OraclePoint {
                        k: 1,
                        mean: est.mean,
                        variance: est.variance,
                        se_mean: est.se_mean,
                        se_variance: est.se_variance,
                    };
                    let series =
                        OracleSeries { kind: annuity_core::oracle::OracleKind::MonteCarlo(kind), points: vec![point] };
                    let report = compare(&analytic, &[series]).unwrap();
                    let c = report.comparisons[0];
                    comparisons += 1;
                    worst_z = worst_z.max(c.z_mean.unwrap_or(0.0).abs());
                    if let (Some(ratio), Some(se)) = (c.variance_ratio, c.se_variance) {
                        worst_band = worst_band.max((ratio - 1.0).abs() / (se / c.analytic_variance));
                    }
                    if !report.verdict.passed() {
                        failed.push(format!(
                            "{:?} p={} q={} j={} s2={} k={k} {kind}",
                            plan.family, plan.p, plan.q, s.j, s.s2
                        ));
                    }
                }
            }
        }
    }
    outcome(
        failed.is_empty() && combos >= 20,
        format!(
            "{combos} combinations x 2 distributions = {comparisons} comparisons, max |z| {worst_z:.2} (limit 4), \
             max variance deviation {worst_band:.2} SE (limit 6) {failed:?}"
        ),
    )
}

/// 6. The fixed-rate identity suite.
fn fixed_identity_suite(grid: &IdentityGrid) -> Outcome {
    let checks = fixed_identities(grid, false).unwrap();
    let cases: usize = checks.iter().map(|c| c.cases).sum();
    let worst = checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max);
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed || c.tolerance > 1e-11).map(|c| c.name.clone()).collect();
    outcome(
        failed.is_empty(),
        format!("{} identities, {cases} cases, max dev {worst:.2e} (tol 1e-11, shifts 1e-12) {failed:?}", checks.len()),
    )
}

/// 7. Zero rate and the geometric singularity q = 1 + j.
fn degenerate_inputs() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut all_finite = true;
    let mut record = |value: f64, reference: f64| {
        all_finite &= value.is_finite();
        worst = worst.max(deviation(value, reference));
    };
    let zero = FixedRate::new(0.0).unwrap();
    for k in 0..=40u32 {
        record(fixed::level_due(k, &zero, Method::Auto), f64::from(k));
        record(fixed::increasing_due(k, &zero, Method::Auto), direct_sum(0.0, k, f64::from));
        record(fixed::increasing_squared_due(k, &zero, Method::Auto), direct_sum(0.0, k, |i| f64::from(i * i)));
        record(fixed::decreasing_due(40, k, &zero, Method::Auto).unwrap(), direct_sum(0.0, k, |i| f64::from(41 - i)));
        let geo = fixed::geometric_due(2.0, 1.1, k, &zero, Method::Auto, PaymentCheck::Strict).unwrap();
        record(geo, direct_sum(0.0, k, |i| 2.0 * 1.1f64.powi(i as i32 - 1)));
        for j in [0.1, 0.05, -0.02] {
            let rate = FixedRate::new(j).unwrap();
            let q = 1.0 + j;
            let geo = fixed::geometric_due(2.0, q, k, &rate, Method::Auto, PaymentCheck::Strict).unwrap();
            record(geo, direct_sum(j, k, |i| 2.0 * q.powi(i as i32 - 1)));
        }
    }
    let anchor =
        fixed::geometric_due(2.0, 1.1, 4, &FixedRate::new(0.1).unwrap(), Method::Auto, PaymentCheck::Strict).unwrap();
    let anchor_dev = relative_deviation(anchor, 11.7128);
    // Random-rate moments at the same degenerate points.
    for (j, q) in [(0.0, 1.0), (0.0, 1.1), (0.1, 1.1)] {
        for s2 in [0.0, 0.0025, 0.04] {
            let s = spec(j, s2);
            for plan in [PaymentPlan::arithmetic(1.0, 1.0, 15).unwrap(), PaymentPlan::geometric(2.0, q, 15).unwrap()] {
                let analytic = analytic_series(&plan, &s, Method::Auto).unwrap();
                let rec = recursive_series(&plan, &s);
                for (a, r) in analytic.rows.iter().zip(&rec.rows) {
                    record(a.mean, r.mean);
                    record(a.variance, r.variance);
                }
            }
        }
    }
    outcome(
        all_finite && worst <= 1e-11 && anchor_dev <= 1e-12,
        format!("all finite: {all_finite}, max dev vs direct sums/recursion {worst:.2e} (tol 1e-11); geometric p=2 q=1.1 j=0.1 k=4 = {anchor} (11.7128)"),
    )
}

/// 8. Byte-identical `verify` JSON across worker counts.
fn determinism() -> Outcome {
    let run = |workers: &str| {
        Command::new(env!("CARGO_BIN_EXE_annuity"))
            .args(["verify", "--family", "increasing", "--j", "0.05", "--s2", "0.01", "--n", "12"])
            .args(["--paths", "2e5", "--seed", "42", "--format", "json", "--workers", workers])
            .output()
            .expect("run annuity")
    };
    let one = run("1");
    let four = run("4");
    let identical = one.stdout == four.stdout && !one.stdout.is_empty();
    let passed = identical && one.status.success() && four.status.success();
    outcome(
        passed,
        format!(
            "workers 1 vs 4: {} bytes, identical: {identical}, exit codes {:?}/{:?}",
            one.stdout.len(),
            one.status.code(),
            four.status.code()
        ),
    )
}

fn main() {
    let grid = IdentityGrid::default();
    type Criterion<'a> = (&'a str, Duration, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("anchor values", Duration::from_secs(1), Box::new(anchors)),
        ("closed form = recursion", Duration::from_secs(5), Box::new(|| closed_vs_recursion(&grid))),
        ("corollary coherence", Duration::from_secs(5), Box::new(|| corollary_coherence(&grid))),
        ("exact enumeration, k <= 12", Duration::from_secs(60), Box::new(|| enumeration_equivalence(&grid))),
        ("distribution-freeness, 10^6 paths", Duration::from_secs(120), Box::new(distribution_freeness)),
        ("fixed-rate identity suite", Duration::from_secs(2), Box::new(|| fixed_identity_suite(&grid))),
        ("degenerate inputs", Duration::from_secs(1), Box::new(degenerate_inputs)),
        ("determinism across workers", Duration::from_secs(120), Box::new(determinism)),
    ];

    println!("acceptance criteria");
    let mut failures = 0;
    for (index, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let passed = result.passed && in_time;
        if !passed {
            failures += 1;
        }
        println!(
            "[{}] criterion {}: {name}: {}; {:.3} s (limit {} s{})",
            if passed { "PASS" } else { "FAIL" },
            index + 1,
            result.detail,
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", exceeded" }
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
