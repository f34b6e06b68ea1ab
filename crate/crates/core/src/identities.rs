//! Grid checks of the fixed-rate identities and the stochastic-moment
//! invariants.
//!
//! Each check evaluates both sides of one relation over a grid of rates and
//! horizons and records the largest deviation
//! `|a - b| / max(1, |a|, |b|)`. Cases evaluated through a singularity
//! fallback are counted separately so a summary shows which paths ran.

use serde::{Deserialize, Serialize};

use crate::corollary::{self, CorollaryPath};
use crate::error::Result;
use crate::fixed::{self, near_zero_rate, Method, PaymentCheck};
use crate::moments::{self, EvalPath, NEGATIVE_VARIANCE_TOL};
use crate::plan::{Family, PaymentPlan};
use crate::rates::{FixedRate, GeometricAux, StochasticRateSpec};

/// Tolerance of the fixed-rate identities.
pub const FIXED_TOL: f64 = 1e-11;
/// Tolerance of the shift and sum relations.
pub const SHIFT_TOL: f64 = 1e-12;
/// Tolerance of closed stochastic moments against the recursions.
pub const CLOSED_MOMENT_TOL: f64 = 1e-9;
/// Tolerance of the decomposition `m = M1 + 2 M2` and of the corollaries.
pub const COHERENCE_TOL: f64 = 1e-10;
/// The squared-annuity identities divide by `d` or `d^2`; they are checked
/// only for `|j|` at least this large.
pub const SQUARED_MIN_RATE: f64 = 0.05;
/// Relative size of the deliberate error injected by the self-test.
pub const CORRUPTION: f64 = 1e-6;

/// `|a - b| / max(1, |a|, |b|)`; infinite when either side is not finite.
pub fn deviation(a: f64, b: f64) -> f64 {
    if !a.is_finite() || !b.is_finite() {
        return f64::INFINITY;
    }
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// `sum_i c_i (1 + j)^(k - i + 1)`, each power taken independently.
pub fn direct_sum(j: f64, k: u32, payment: impl Fn(u32) -> f64) -> f64 {
    (1..=k).map(|i| payment(i) * (1.0 + j).powi((k - i + 1) as i32)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityGrid {
    pub fixed_rates: Vec<f64>,
    pub fixed_k_max: u32,
    pub stochastic_rates: Vec<f64>,
    pub variances: Vec<f64>,
    pub stochastic_k_max: u32,
    pub first_payments: Vec<f64>,
    pub arithmetic_steps: Vec<f64>,
    pub geometric_ratios: Vec<f64>,
    pub growth_rates: Vec<f64>,
}

impl Default for IdentityGrid {
    fn default() -> Self {
        IdentityGrid {
            fixed_rates: vec![-0.05, 0.0, 0.01, 0.05, 0.1, 0.25],
            fixed_k_max: 40,
            stochastic_rates: vec![0.0, 0.01, 0.05, 0.1, 0.2],
            variances: vec![0.0, 0.0025, 0.04],
            stochastic_k_max: 30,
            first_payments: vec![1.0, 2.0, 5.0],
            arithmetic_steps: vec![-0.2, 0.0, 0.5, 1.0],
            geometric_ratios: vec![0.9, 1.0, 1.05, 1.2],
            growth_rates: vec![0.0, 0.03, 0.2],
        }
    }
}

impl IdentityGrid {
    /// Every plan on the grid, arithmetic then geometric, with horizon `n`.
    pub fn plans(&self, n: u32) -> Vec<PaymentPlan> {
        let mut plans = Vec::new();
        for (family, steps) in
            [(Family::Arithmetic, &self.arithmetic_steps), (Family::Geometric, &self.geometric_ratios)]
        {
            for &p in &self.first_payments {
                for &q in steps {
                    // Strict checks are the caller's policy; the grid only
                    // needs valid shapes.
                    if let Ok(plan) = PaymentPlan::new(family, p, q, n, PaymentCheck::Unchecked) {
                        plans.push(plan);
                    }
                }
            }
        }
        plans
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub tolerance: f64,
    pub cases: usize,
    /// Cases that ran through a singularity or cancellation fallback.
    pub fallback_cases: usize,
    pub max_deviation: f64,
    pub worst_case: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentitySummary {
    pub checks: Vec<IdentityCheck>,
    pub total_cases: usize,
    pub failed_checks: usize,
    pub max_deviation: f64,
    pub passed: bool,
}

impl IdentitySummary {
    fn new(checks: Vec<IdentityCheck>) -> Self {
        let total_cases = checks.iter().map(|c| c.cases).sum();
        let failed_checks = checks.iter().filter(|c| !c.passed).count();
        let max_deviation = checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max);
        IdentitySummary { checks, total_cases, failed_checks, max_deviation, passed: failed_checks == 0 }
    }
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    fallback_cases: usize,
    max_deviation: f64,
    worst_case: String,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tally { name, tolerance, cases: 0, fallback_cases: 0, max_deviation: 0.0, worst_case: String::new() }
    }

    fn record(&mut self, dev: f64, case: impl FnOnce() -> String) {
        self.cases += 1;
        let dev = if dev.is_nan() { f64::INFINITY } else { dev };
        if dev > self.max_deviation || self.worst_case.is_empty() {
            self.max_deviation = dev;
            self.worst_case = case();
        }
    }

    fn compare(&mut self, a: f64, b: f64, case: impl FnOnce() -> String) {
        self.record(deviation(a, b), case);
    }

    fn fallback(&mut self, used: bool) {
        if used {
            self.fallback_cases += 1;
        }
    }

    fn finish(self) -> IdentityCheck {
        IdentityCheck {
            name: self.name.to_string(),
            tolerance: self.tolerance,
            cases: self.cases,
            fallback_cases: self.fallback_cases,
            passed: self.max_deviation <= self.tolerance,
            max_deviation: self.max_deviation,
            worst_case: self.worst_case,
        }
    }
}

/// The fixed-rate identity suite. With `corrupt` set, the squared-increasing
/// relation through the level annuity is perturbed by [`CORRUPTION`] so the
/// suite must fail.
pub fn fixed_identities(grid: &IdentityGrid, corrupt: bool) -> Result<Vec<IdentityCheck>> {
    let mut discount = Tally::new("discount factors: (1+j)d = j, (1+j)v = 1, v + d = 1", FIXED_TOL);
    let mut level = Tally::new("level: closed = recursion = direct sum", FIXED_TOL);
    let mut inc = Tally::new("increasing: closed = recursion = direct sum", FIXED_TOL);
    let mut inc2 = Tally::new("squared increasing: closed = recursion = direct sum", FIXED_TOL);
    let mut via_level = Tally::new("squared increasing through the level annuity = direct sum", FIXED_TOL);
    let mut shift1 = Tally::new("shift: Is(k-1) = Is(k) - s(k)", SHIFT_TOL);
    let mut shift2 = Tally::new("shift: I2s(k-1) = I2s(k) - 2 Is(k) + s(k)", SHIFT_TOL);
    let mut dec = Tally::new("decreasing: closed = recursion = direct sum", FIXED_TOL);
    let mut dec_sum = Tally::new("sum: Is(k) + Ds(n,k) = (n+1) s(k)", SHIFT_TOL);
    let mut arith = Tally::new("arithmetic: direct sum = (p-q) s + q Is", FIXED_TOL);
    let mut special = Tally::new("arithmetic (1,0), (1,1), (n,-1) = level, increasing, decreasing", FIXED_TOL);
    let mut geo = Tally::new("geometric: closed = recursion = direct sum, including q = 1+j", FIXED_TOL);
    let mut geo_level = Tally::new("geometric (1,1) = level", FIXED_TOL);
    let mut growth = Tally::new("growth: (1+j)^k s(k,t) / (1+t) = direct sum", FIXED_TOL);
    let mut sq_level = Tally::new("squared level: s(k)^2 = (s(2k) - 2 s(k)) / d", FIXED_TOL);
    let mut sq_inc = Tally::new("squared increasing: Is(k)^2 = (Is(2k) - 2(1+kd) Is(k) - k^2) / d^2", FIXED_TOL);

    let arithmetic_shapes: Vec<(f64, f64)> =
        grid.first_payments.iter().flat_map(|&p| grid.arithmetic_steps.iter().map(move |&q| (p, q))).collect();

    for &j in &grid.fixed_rates {
        let rate = FixedRate::new(j)?;
        let singular = near_zero_rate(j);
        let g = 1.0 + j;
        discount.compare(g * rate.d, j, || format!("j={j} (1+j)d"));
        discount.compare(g * rate.v, 1.0, || format!("j={j} (1+j)v"));
        discount.compare(rate.v + rate.d, 1.0, || format!("j={j} v+d"));

        for k in 0..=grid.fixed_k_max {
            let case = |what: &str| format!("j={j} k={k} {what}");
            let kf = f64::from(k);
            // The closed forms as written, except at j = 0 where they are
            // undefined; relations between annuities use certified values.
            let raw = if singular { Method::Recursive } else { Method::Closed };
            let s = fixed::level_due(k, &rate, Method::Auto);
            let is = fixed::increasing_due(k, &rate, Method::Auto);
            let i2s = fixed::increasing_squared_due(k, &rate, Method::Auto);

            for (tally, closed, payment) in [
                (&mut level, fixed::level_due(k, &rate, raw), &(|_: u32| 1.0) as &dyn Fn(u32) -> f64),
                (&mut inc, fixed::increasing_due(k, &rate, raw), &|i: u32| f64::from(i)),
                (&mut inc2, fixed::increasing_squared_due(k, &rate, raw), &|i: u32| f64::from(i) * f64::from(i)),
            ] {
                let recursion = fixed::accumulate(&rate, k, payment);
                let direct = direct_sum(j, k, payment);
                tally.fallback(singular);
                tally.compare(closed, direct, || case("closed vs direct"));
                tally.compare(recursion, direct, || case("recursion vs direct"));
            }
            let level_recursion = fixed::level_due(k, &rate, Method::Recursive);
            level.compare(level_recursion, fixed::accumulate(&rate, k, |_| 1.0), || case("recursion paths"));

            let mut from_level = fixed::increasing_squared_from_level(k, &rate);
            if corrupt {
                from_level *= 1.0 + CORRUPTION;
            }
            via_level.fallback(singular);
            via_level.compare(from_level, direct_sum(j, k, |i| f64::from(i) * f64::from(i)), || case(""));

            if k >= 1 {
                let is_prev = fixed::increasing_due(k - 1, &rate, Method::Auto);
                let i2s_prev = fixed::increasing_squared_due(k - 1, &rate, Method::Auto);
                shift1.compare(is_prev, is - s, || case(""));
                shift2.compare(i2s_prev, i2s - 2.0 * is + s, || case(""));

                for n in [k, k + 3] {
                    let nf = f64::from(n);
                    let ds = fixed::decreasing_due(n, k, &rate, Method::Auto)?;
                    let direct = direct_sum(j, k, |i| f64::from(n - i + 1));
                    let recursion = fixed::decreasing_due(n, k, &rate, Method::Recursive)?;
                    dec.fallback(singular);
                    dec.compare(fixed::decreasing_due(n, k, &rate, raw)?, direct, || case(&format!("n={n} closed")));
                    dec.compare(ds, direct, || case(&format!("n={n} auto")));
                    dec.compare(recursion, direct, || case(&format!("n={n} recursion")));
                    dec_sum.compare(is + ds, (nf + 1.0) * s, || case(&format!("n={n}")));
                    let as_arith = fixed::arithmetic_due(nf, -1.0, k, &rate, Method::Auto, PaymentCheck::Unchecked)?;
                    special.compare(as_arith, ds, || case(&format!("(n,-1) n={n}")));
                }
            }

            for &(p, q) in &arithmetic_shapes {
                let direct = direct_sum(j, k, |i| p + f64::from(i - 1) * q);
                let split = (p - q) * s + q * is;
                for method in [raw, Method::Auto, Method::Recursive] {
                    let value = fixed::arithmetic_due(p, q, k, &rate, method, PaymentCheck::Unchecked)?;
                    arith.compare(value, direct, || case(&format!("p={p} q={q} {method:?}")));
                }
                arith.fallback(singular);
                arith.compare(split, direct, || case(&format!("p={p} q={q} split")));
            }
            let unchecked = PaymentCheck::Unchecked;
            special.compare(fixed::arithmetic_due(1.0, 0.0, k, &rate, Method::Auto, unchecked)?, s, || case("(1,0)"));
            special.compare(fixed::arithmetic_due(1.0, 1.0, k, &rate, Method::Auto, unchecked)?, is, || case("(1,1)"));

            let mut ratios = grid.geometric_ratios.clone();
            ratios.push(g);
            for &p in &grid.first_payments {
                for &q in &ratios {
                    let direct = direct_sum(j, k, |i| p * q.powi(i as i32 - 1));
                    let pole = fixed::near_geometric_pole(g, q);
                    let method = if pole { Method::Recursive } else { Method::Closed };
                    let closed = fixed::geometric_due(p, q, k, &rate, method, unchecked)?;
                    let auto = fixed::geometric_due(p, q, k, &rate, Method::Auto, unchecked)?;
                    let recursion = fixed::geometric_due(p, q, k, &rate, Method::Recursive, unchecked)?;
                    geo.fallback(pole);
                    geo.compare(closed, direct, || case(&format!("p={p} q={q} closed")));
                    geo.compare(auto, direct, || case(&format!("p={p} q={q} auto")));
                    geo.compare(recursion, direct, || case(&format!("p={p} q={q} recursion")));
                }
            }
            geo_level.compare(fixed::geometric_due(1.0, 1.0, k, &rate, Method::Auto, unchecked)?, s, || case(""));

            let mut growth_rates = grid.growth_rates.clone();
            growth_rates.push(j);
            for &u in &growth_rates {
                let value = fixed::growth_due(u, k, &rate, Method::Auto)?;
                let t = (1.0 + u) / g - 1.0;
                growth.fallback(near_zero_rate(t));
                growth.compare(value, direct_sum(j, k, |i| (1.0 + u).powi(i as i32 - 1)), || case(&format!("u={u}")));
            }

            if j.abs() >= SQUARED_MIN_RATE {
                let s2k = fixed::level_due(2 * k, &rate, Method::Auto);
                let is2k = fixed::increasing_due(2 * k, &rate, Method::Auto);
                let d = rate.d;
                sq_level.compare(s * s, (s2k - 2.0 * s) / d, || case(""));
                sq_inc.compare(is * is, (is2k - 2.0 * (1.0 + kf * d) * is - kf * kf) / (d * d), || case(""));
            }
        }
    }

    Ok([
        discount, level, inc, inc2, via_level, shift1, shift2, dec, dec_sum, arith, special, geo, geo_level, growth,
        sq_level, sq_inc,
    ]
    .into_iter()
    .map(Tally::finish)
    .collect())
}

/// Stochastic-moment invariants over every plan, rate and variance on the
/// grid: closed forms against recursions and defining sums, the
/// decomposition, non-negativity, monotone risk and corollary coherence.
pub fn stochastic_invariants(grid: &IdentityGrid) -> Result<Vec<IdentityCheck>> {
    let mut mean = Tally::new("mean: closed = recursion", CLOSED_MOMENT_TOL);
    let mut m1 = Tally::new("M1: closed forms = defining sum", CLOSED_MOMENT_TOL);
    let mut m2 = Tally::new("M2: closed = defining sum", CLOSED_MOMENT_TOL);
    let mut second = Tally::new("second moment: closed = recursion", CLOSED_MOMENT_TOL);
    let mut mean_sq = Tally::new("squared mean: closed = squared recursion mean", CLOSED_MOMENT_TOL);
    let mut variance = Tally::new("variance: closed = recursion", CLOSED_MOMENT_TOL);
    let mut decomposition = Tally::new("decomposition: m = M1 + 2 M2", COHERENCE_TOL);
    let mut nonneg = Tally::new("non-negative variance: var >= -1e-9 m", NEGATIVE_VARIANCE_TOL);
    let mut monotone = Tally::new("variance non-decreasing in s2", 0.0);
    let mut s2_free = Tally::new("mean independent of s2", 0.0);
    let mut cor_level = Tally::new("level corollary = general path", COHERENCE_TOL);
    let mut cor_inc = Tally::new("increasing corollary = general path", COHERENCE_TOL);
    let mut cor_dec = Tally::new("decreasing corollary = general path", COHERENCE_TOL);
    let mut cor_growth = Tally::new("growth corollary = general path", COHERENCE_TOL);

    let n = grid.stochastic_k_max;
    let plans = grid.plans(n);
    let mut variances = grid.variances.clone();
    variances.sort_by(f64::total_cmp);

    for &j in &grid.stochastic_rates {
        let specs = variances.iter().map(|&s2| StochasticRateSpec::new(j, s2)).collect::<Result<Vec<_>>>()?;
        for plan in &plans {
            let mut previous: Option<(f64, Vec<f64>, Vec<f64>)> = None;
            for spec in &specs {
                let s2 = spec.s2;
                let recursion = moments::recursive_series(plan, spec);
                let case = |k: u32| format!("{:?} p={} q={} j={j} s2={s2} k={k}", plan.family, plan.p, plan.q);
                for row in &recursion.rows {
                    let k = row.k;
                    mean.compare(moments::mean_closed(plan, spec, k)?, row.mean, || case(k));
                    let m1_sum = moments::m1_defining_sum(plan, spec, k)?;
                    m1.compare(moments::m1(plan, spec, k)?, m1_sum, || case(k));
                    if plan.family == Family::Arithmetic {
                        m1.compare(moments::m1_arithmetic_shifted(plan, spec, k)?, m1_sum, || case(k));
                    }
                    let m2_closed = moments::m2(plan, spec, k)?;
                    m2.compare(m2_closed, moments::m2_defining_sum(plan, spec, k)?, || case(k));
                    let second_closed = moments::second_moment_closed(plan, spec, k)?;
                    second.compare(second_closed, row.second_moment, || case(k));
                    mean_sq.compare(moments::mean_squared(plan, spec, k)?, row.mean * row.mean, || case(k));
                    let var = moments::variance(plan, spec, k)?;
                    variance.fallback(var.path == EvalPath::Recursive);
                    variance.compare(var.value, row.variance, || case(k));
                    let m1_closed = moments::m1(plan, spec, k)?;
                    decomposition.record(
                        (second_closed - m1_closed - 2.0 * m2_closed).abs() / second_closed.abs().max(1.0),
                        || case(k),
                    );
                    if let Some(raw) = moments::raw_closed_variance(plan, spec, k)? {
                        nonneg.record((-raw.value).max(0.0) / row.second_moment.abs().max(1.0), || case(k));
                    } else {
                        nonneg.fallback(true);
                        nonneg.record((-var.value).max(0.0), || case(k));
                    }
                }
                let means = recursion.means();
                let vars = recursion.variances();
                if let Some((prev_s2, prev_means, prev_vars)) = &previous {
                    for (i, (lo, hi)) in prev_vars.iter().zip(&vars).enumerate() {
                        monotone.record((lo - hi).max(0.0), || format!("{} s2 {prev_s2} -> {s2}", case(i as u32 + 1)));
                    }
                    for (i, (a, b)) in prev_means.iter().zip(&means).enumerate() {
                        s2_free.record((a - b).abs(), || case(i as u32 + 1));
                    }
                }
                previous = Some((s2, means, vars));
            }
        }

        for spec in &specs {
            let s2 = spec.s2;
            for k in 1..=n {
                let case = |what: &str| format!("j={j} s2={s2} k={k} {what}");
                let level_plan = PaymentPlan::arithmetic(1.0, 0.0, k)?;
                let c = corollary::corollary_level(spec, k)?;
                cor_level.fallback(c.path == CorollaryPath::General);
                cor_level.compare(c.mean, moments::mean_closed(&level_plan, spec, k)?, || case("mean"));
                cor_level.compare(c.variance, moments::variance(&level_plan, spec, k)?.value, || case("var"));

                let inc_plan = PaymentPlan::arithmetic(1.0, 1.0, k)?;
                let c = corollary::corollary_increasing(spec, k)?;
                cor_inc.fallback(c.path == CorollaryPath::General);
                cor_inc.compare(c.mean, moments::mean_closed(&inc_plan, spec, k)?, || case("mean"));
                cor_inc.compare(c.m1, moments::m1(&inc_plan, spec, k)?, || case("M1"));
                cor_inc.compare(c.m2, moments::m2(&inc_plan, spec, k)?, || case("M2"));
                cor_inc.compare(c.second_moment, moments::second_moment_closed(&inc_plan, spec, k)?, || case("m"));
                cor_inc.compare(c.variance, moments::variance(&inc_plan, spec, k)?.value, || case("var"));

                for horizon in [k, n] {
                    let dec_plan = PaymentPlan::arithmetic(f64::from(horizon), -1.0, k)?;
                    let c = corollary::corollary_decreasing(spec, horizon, k)?;
                    cor_dec.fallback(c.path == CorollaryPath::General);
                    let what = format!("n={horizon}");
                    cor_dec.compare(c.mean, moments::mean_closed(&dec_plan, spec, k)?, || case(&what));
                    cor_dec.compare(c.variance, moments::variance(&dec_plan, spec, k)?.value, || case(&what));
                }

                let mut growth_rates = grid.growth_rates.clone();
                growth_rates.push(j);
                for &u in &growth_rates {
                    let aux = GeometricAux::new(spec, u)?;
                    let growth_plan = PaymentPlan::geometric(1.0, 1.0 + u, k)?;
                    let c = corollary::corollary_growth(spec, &aux, k)?;
                    cor_growth.fallback(c.path == CorollaryPath::General);
                    let what = format!("u={u}");
                    cor_growth.compare(c.mean, moments::mean_closed(&growth_plan, spec, k)?, || case(&what));
                    cor_growth.compare(c.variance, moments::variance(&growth_plan, spec, k)?.value, || case(&what));
                }
            }
        }
    }

    Ok([
        mean,
        m1,
        m2,
        second,
        mean_sq,
        variance,
        decomposition,
        nonneg,
        monotone,
        s2_free,
        cor_level,
        cor_inc,
        cor_dec,
        cor_growth,
    ]
    .into_iter()
    .map(Tally::finish)
    .collect())
}

/// Both suites.
pub fn run_identities(grid: &IdentityGrid, corrupt: bool) -> Result<IdentitySummary> {
    let mut checks = fixed_identities(grid, corrupt)?;
    checks.extend(stochastic_invariants(grid)?);
    Ok(IdentitySummary::new(checks))
}
