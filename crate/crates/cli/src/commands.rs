//! The four subcommands. Each validates its whole configuration before any
//! computation and returns the rendered output plus a pass flag.

use annuity_core::fixed::{Accumulator, AccumulatorKind, Method, PaymentCheck};
use annuity_core::identities::{deviation, run_identities, IdentityGrid, IdentitySummary};
use annuity_core::moments::{self, analytic_series, recursive_series, EvalPath};
use annuity_core::oracle::{
    compare, enumerate_series, simulate_series, DistributionKind, OracleReport, OracleSeries, RateDistribution,
    SimConfig, MAX_ENUMERATION_K,
};
use annuity_core::{Family, FixedRate, PaymentPlan, StochasticRateSpec};
use serde::Serialize;

use crate::args::{FixedArgs, Format, IdentitiesArgs, MethodArg, MomentsArgs, PlanArgs, VerifyArgs};
use crate::error::{CliError, Result};
use crate::render::{self, Table};

/// Rendered output of a command and whether its checks passed.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub passed: bool,
    /// One-line summary for stderr.
    pub note: Option<String>,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, passed: true, note: None }
    }
}

fn check(strict: bool) -> PaymentCheck {
    if strict {
        PaymentCheck::Strict
    } else {
        PaymentCheck::Unchecked
    }
}

fn ratio(q: Option<f64>, u: Option<f64>) -> Result<Option<f64>> {
    match (q, u) {
        (Some(q), Some(u)) if q != 1.0 + u => Err(CliError::Usage(format!("--q {q} contradicts --u {u} (q = 1 + u)"))),
        (Some(q), _) => Ok(Some(q)),
        (None, Some(u)) => Ok(Some(1.0 + u)),
        (None, None) => Ok(None),
    }
}

// fixed

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Level,
    Increasing,
    IncreasingSq,
    Decreasing,
    Arithmetic,
    Geometric,
}

impl Column {
    fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "level" => Ok(Column::Level),
            "increasing" => Ok(Column::Increasing),
            "increasing_sq" | "increasing-sq" => Ok(Column::IncreasingSq),
            "decreasing" => Ok(Column::Decreasing),
            "arithmetic" => Ok(Column::Arithmetic),
            "geometric" => Ok(Column::Geometric),
            other => Err(CliError::Usage(format!("unknown fixed-rate family {other:?}"))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Column::Level => "level",
            Column::Increasing => "increasing",
            Column::IncreasingSq => "increasing_sq",
            Column::Decreasing => "decreasing",
            Column::Arithmetic => "arithmetic",
            Column::Geometric => "geometric",
        }
    }
}

#[derive(Debug, Serialize)]
struct FixedReport {
    j: f64,
    n: u32,
    columns: Vec<&'static str>,
    rows: Vec<FixedRow>,
}

#[derive(Debug, Default, Serialize)]
struct FixedRow {
    k: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    increasing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    increasing_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decreasing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    arithmetic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    geometric: Option<f64>,
}

impl FixedRow {
    fn slot(&mut self, column: Column) -> &mut Option<f64> {
        match column {
            Column::Level => &mut self.level,
            Column::Increasing => &mut self.increasing,
            Column::IncreasingSq => &mut self.increasing_sq,
            Column::Decreasing => &mut self.decreasing,
            Column::Arithmetic => &mut self.arithmetic,
            Column::Geometric => &mut self.geometric,
        }
    }
}

pub fn cmd_fixed(args: &FixedArgs) -> Result<Outcome> {
    let mut columns = Vec::new();
    for name in args.family.split(',') {
        let column = Column::parse(name)?;
        if !columns.contains(&column) {
            columns.push(column);
        }
    }
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let rate = FixedRate::new(args.j)?;
    let q = ratio(args.q, args.u)?;
    let accumulators: Vec<(Column, Accumulator)> = columns
        .iter()
        .map(|&column| {
            let kind = match column {
                Column::Level => AccumulatorKind::Level,
                Column::Increasing => AccumulatorKind::Increasing,
                Column::IncreasingSq => AccumulatorKind::IncreasingSquared,
                Column::Decreasing => AccumulatorKind::Decreasing { n: args.n },
                Column::Arithmetic => AccumulatorKind::Arithmetic { p: args.p, q: q.unwrap_or(0.0) },
                Column::Geometric => AccumulatorKind::Geometric { p: args.p, q: q.unwrap_or(1.0) },
            };
            (column, Accumulator::new(kind, rate).with_check(check(args.strict)))
        })
        .collect();
    // Validation pass over the last row, whose payments are the extreme ones.
    for (_, acc) in &accumulators {
        acc.value(args.n, Method::Auto)?;
    }

    let mut rows = Vec::new();
    for k in 1..=args.n {
        let mut row = FixedRow { k, ..FixedRow::default() };
        for (column, acc) in &accumulators {
            *row.slot(*column) = Some(acc.value(k, Method::Auto)?);
        }
        rows.push(row);
    }
    let report = FixedReport { j: args.j, n: args.n, columns: columns.iter().map(|c| c.name()).collect(), rows };

    let text = match args.output.format {
        Format::Json => render::json(&report)?,
        Format::Csv => {
            let mut table = Table::new(std::iter::once("k").chain(report.columns.iter().copied()));
            for row in &report.rows {
                let mut cells = vec![row.k.to_string()];
                for column in &columns {
                    let value = match column {
                        Column::Level => row.level,
                        Column::Increasing => row.increasing,
                        Column::IncreasingSq => row.increasing_sq,
                        Column::Decreasing => row.decreasing,
                        Column::Arithmetic => row.arithmetic,
                        Column::Geometric => row.geometric,
                    };
                    cells.push(render::number(value));
                }
                table.push(cells);
            }
            table.finish()?
        }
    };
    Ok(Outcome::ok(text))
}

// shared plan handling

/// The payment plan and rate spec described by the plan flags.
pub fn plan_and_spec(args: &PlanArgs) -> Result<(PaymentPlan, StochasticRateSpec)> {
    let spec = StochasticRateSpec::new(args.j, args.s2)?;
    if let Some(plan) = PaymentPlan::named(&args.family, args.n) {
        if args.p.is_some() || args.q.is_some() || args.u.is_some() {
            return Err(CliError::Usage(format!("--family {} fixes the payments; drop --p/--q/--u", args.family)));
        }
        return Ok((plan?, spec));
    }
    let q = ratio(args.q, args.u)?;
    let (family, p, q) = match args.family.as_str() {
        "arithmetic" => (Family::Arithmetic, args.p.unwrap_or(1.0), q.unwrap_or(0.0)),
        "geometric" => (Family::Geometric, args.p.unwrap_or(1.0), q.unwrap_or(1.0)),
        other => return Err(CliError::Usage(format!("unknown payment family {other:?}"))),
    };
    if args.u.is_some() && family != Family::Geometric {
        return Err(CliError::Usage("--u applies to geometric plans only".into()));
    }
    let plan = PaymentPlan::new(family, p, q, args.n, check(args.strict))?;
    Ok((plan, spec))
}

#[derive(Debug, Serialize)]
struct Input {
    plan: PaymentPlan,
    spec: StochasticRateSpec,
}

// moments

#[derive(Debug, Serialize)]
struct MomentsReport {
    input: Input,
    method: &'static str,
    rows: Vec<MomentsLine>,
}

#[derive(Debug, Serialize)]
struct MomentsLine {
    k: u32,
    mean: f64,
    second_moment: f64,
    variance: f64,
    m1: f64,
    m2: f64,
    variance_path: EvalPath,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_discrepancy: Option<f64>,
}

pub fn cmd_moments(args: &MomentsArgs) -> Result<Outcome> {
    let (plan, spec) = plan_and_spec(&args.plan)?;
    let recursive = recursive_series(&plan, &spec);
    let rows: Vec<MomentsLine> = match args.method {
        MethodArg::Recursive => recursive
            .rows
            .iter()
            .map(|r| MomentsLine {
                k: r.k,
                mean: r.mean,
                second_moment: r.second_moment,
                variance: r.variance,
                m1: r.m1,
                m2: r.m2,
                variance_path: EvalPath::Recursive,
                max_discrepancy: None,
            })
            .collect(),
        MethodArg::Closed | MethodArg::Both => {
            let closed = analytic_series(&plan, &spec, Method::Auto)?;
            closed
                .rows
                .iter()
                .zip(&recursive.rows)
                .map(|(c, r)| {
                    let path = moments::variance(&plan, &spec, c.k)?.path;
                    let discrepancy = [
                        deviation(c.mean, r.mean),
                        deviation(c.second_moment, r.second_moment),
                        deviation(c.variance, r.variance),
                        deviation(c.m1, r.m1),
                        deviation(c.m2, r.m2),
                    ]
                    .into_iter()
                    .fold(0.0, f64::max);
                    Ok(MomentsLine {
                        k: c.k,
                        mean: c.mean,
                        second_moment: c.second_moment,
                        variance: c.variance,
                        m1: c.m1,
                        m2: c.m2,
                        variance_path: path,
                        max_discrepancy: (args.method == MethodArg::Both).then_some(discrepancy),
                    })
                })
                .collect::<Result<_>>()?
        }
    };
    let method = match args.method {
        MethodArg::Closed => "closed",
        MethodArg::Recursive => "recursive",
        MethodArg::Both => "both",
    };
    let report = MomentsReport { input: Input { plan, spec }, method, rows };

    let text = match args.output.format {
        Format::Json => render::json(&report)?,
        Format::Csv => {
            let mut header = vec!["k", "mean", "second_moment", "variance", "variance_path"];
            if args.method == MethodArg::Both {
                header.push("max_discrepancy");
            }
            let mut table = Table::new(header);
            for row in &report.rows {
                let path = match row.variance_path {
                    EvalPath::Closed => "closed",
                    EvalPath::Recursive => "recursive",
                };
                let mut cells = vec![
                    row.k.to_string(),
                    render::number(Some(row.mean)),
                    render::number(Some(row.second_moment)),
                    render::number(Some(row.variance)),
                    path.to_string(),
                ];
                if let Some(d) = row.max_discrepancy {
                    cells.push(render::number(Some(d)));
                }
                table.push(cells);
            }
            table.finish()?
        }
    };
    Ok(Outcome::ok(text))
}

// verify

/// Whether exact enumeration took part in a verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "kebab-case")]
pub enum EnumerationStatus {
    Run,
    Skipped(String),
}

/// Everything a verification run reports. The worker count is left out on
/// purpose: it never changes the numbers, so reports from different worker
/// counts are byte-identical.
#[derive(Debug, Serialize)]
pub struct VerifyReport {
    input: Input,
    paths: u64,
    seed: u64,
    distributions: Vec<DistributionKind>,
    enumeration: EnumerationStatus,
    report: OracleReport,
}

fn distributions(list: &str) -> Result<Vec<DistributionKind>> {
    if list.trim() == "all" {
        return Ok(DistributionKind::ALL.to_vec());
    }
    let mut kinds = Vec::new();
    for name in list.split(',') {
        let kind: DistributionKind = name.trim().parse()?;
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    Ok(kinds)
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<Outcome> {
    let (plan, spec) = plan_and_spec(&args.plan)?;
    let kinds = distributions(&args.distribution)?;
    let config = SimConfig::new(args.paths, args.seed, args.workers.unwrap_or_else(default_workers))?;
    let samplers = kinds
        .iter()
        .map(|&kind| RateDistribution::new(kind, &spec).map(|d| (kind, d)))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let k = plan.n;
    let two_point_ok = RateDistribution::new(DistributionKind::TwoPoint, &spec).is_ok();
    let enumeration = if k > MAX_ENUMERATION_K {
        EnumerationStatus::Skipped(format!("k = {k} exceeds the enumeration cap {MAX_ENUMERATION_K}"))
    } else if !two_point_ok {
        EnumerationStatus::Skipped("two-point support violates 1 + i > 0".into())
    } else {
        EnumerationStatus::Run
    };

    let analytic = analytic_series(&plan, &spec, Method::Auto)?;
    let mut oracles = Vec::new();
    if enumeration == EnumerationStatus::Run {
        oracles.push(OracleSeries::from_enumeration(&enumerate_series(&plan, &spec, k)?));
    }
    for (kind, dist) in &samplers {
        oracles.push(OracleSeries::from_simulation(*kind, &simulate_series(&plan, dist, &config, k)?));
    }
    let report = compare(&analytic, &oracles)?;
    let passed = report.verdict.passed();
    let failures = report.failures().count();
    let note = format!(
        "verify: {} comparisons, {failures} failed, verdict {}",
        report.comparisons.len(),
        if passed { "pass" } else { "fail" }
    );
    let full = VerifyReport {
        input: Input { plan, spec },
        paths: args.paths,
        seed: args.seed,
        distributions: kinds,
        enumeration,
        report,
    };

    let text = match args.output.format {
        Format::Json => render::json(&full)?,
        Format::Csv => {
            let mut table = Table::new([
                "oracle",
                "k",
                "analytic_mean",
                "oracle_mean",
                "rel_dev_mean",
                "se_mean",
                "z_mean",
                "analytic_variance",
                "oracle_variance",
                "rel_dev_variance",
                "se_variance",
                "variance_ratio",
                "band_low",
                "band_high",
                "verdict",
            ]);
            for c in &full.report.comparisons {
                table.push(vec![
                    c.oracle.to_string(),
                    c.k.to_string(),
                    render::number(Some(c.analytic_mean)),
                    render::number(Some(c.oracle_mean)),
                    render::number(Some(c.rel_dev_mean)),
                    render::number(c.se_mean),
                    render::number(c.z_mean),
                    render::number(Some(c.analytic_variance)),
                    render::number(Some(c.oracle_variance)),
                    render::number(Some(c.rel_dev_variance)),
                    render::number(c.se_variance),
                    render::number(c.variance_ratio),
                    render::number(c.variance_band.map(|b| b[0])),
                    render::number(c.variance_band.map(|b| b[1])),
                    if c.verdict.passed() { "pass" } else { "fail" }.to_string(),
                ]);
            }
            table.finish()?
        }
    };
    Ok(Outcome { text, passed, note: Some(note) })
}

// identities

pub fn identity_grid(args: &IdentitiesArgs) -> Result<IdentityGrid> {
    let mut grid = IdentityGrid::default();
    if let Some(k) = args.fixed_k_max {
        grid.fixed_k_max = k;
    }
    if let Some(k) = args.stochastic_k_max {
        grid.stochastic_k_max = k;
    }
    if grid.fixed_k_max == 0 || grid.stochastic_k_max == 0 {
        return Err(CliError::Usage("grid k maxima must be at least 1".into()));
    }
    Ok(grid)
}

pub fn cmd_identities(args: &IdentitiesArgs) -> Result<Outcome> {
    let grid = identity_grid(args)?;
    let summary: IdentitySummary = run_identities(&grid, args.corrupt)?;
    let note = format!(
        "identities: {} checks over {} cases, {} failed, max deviation {:e}",
        summary.checks.len(),
        summary.total_cases,
        summary.failed_checks,
        summary.max_deviation
    );
    let text = match args.output.format {
        Format::Json => render::json(&summary)?,
        Format::Csv => {
            let mut table =
                Table::new(["check", "tolerance", "cases", "fallback_cases", "max_deviation", "worst_case", "passed"]);
            for c in &summary.checks {
                table.push(vec![
                    c.name.clone(),
                    render::number(Some(c.tolerance)),
                    c.cases.to_string(),
                    c.fallback_cases.to_string(),
                    render::number(Some(c.max_deviation)),
                    c.worst_case.clone(),
                    c.passed.to_string(),
                ]);
            }
            table.finish()?
        }
    };
    Ok(Outcome { text, passed: summary.passed, note: Some(note) })
}
