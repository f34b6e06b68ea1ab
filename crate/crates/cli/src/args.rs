//! Command-line grammar and `--config` file merging.
//!
//! A config file holds `key = value` lines named like the long flags
//! (`j = 0.1`, `family = geometric`). Its entries are spliced in before the
//! command-line flags, so a flag given on the command line wins.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "annuity", version, about = "Accumulated values of annuities-due under fixed and random rates")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed-rate accumulated values, one row per k = 1..n.
    Fixed(FixedArgs),
    /// Mean, second moment and variance of C_k under i.i.d. random rates.
    Moments(MomentsArgs),
    /// Analytic moments against exact enumeration and Monte Carlo.
    Verify(VerifyArgs),
    /// The fixed-rate identity suite and the stochastic invariants.
    Identities(IdentitiesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Closed,
    Recursive,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write the result to FILE instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// key=value file mirroring the long flags; flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

/// Payment plan and rate flags. Rates are decimals: 0.1 means 10%.
#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    /// Payment family: arithmetic, geometric, level, increasing or decreasing.
    #[arg(long, default_value = "arithmetic")]
    pub family: String,
    /// First payment (arithmetic and geometric families).
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Common difference (arithmetic) or ratio (geometric).
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    /// Payment growth rate; sets the geometric ratio q = 1 + u.
    #[arg(long, allow_negative_numbers = true)]
    pub u: Option<f64>,
    /// Number of payments.
    #[arg(long)]
    pub n: u32,
    /// Mean annual rate.
    #[arg(long, allow_negative_numbers = true)]
    pub j: f64,
    /// Variance of the annual rate.
    #[arg(long, default_value_t = 0.0)]
    pub s2: f64,
    /// Reject plans with non-positive payments.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub strict: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FixedArgs {
    /// Comma-separated columns: level, increasing, increasing_sq, decreasing,
    /// arithmetic, geometric.
    #[arg(long, default_value = "level,increasing,increasing_sq,decreasing")]
    pub family: String,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub p: f64,
    /// Common difference for `arithmetic`, ratio for `geometric`.
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    /// Sets the geometric ratio q = 1 + u.
    #[arg(long, allow_negative_numbers = true)]
    pub u: Option<f64>,
    #[arg(long)]
    pub n: u32,
    /// Annual rate.
    #[arg(long, allow_negative_numbers = true)]
    pub j: f64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub strict: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
    #[arg(long, value_enum, default_value = "closed")]
    pub method: MethodArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Comma-separated Monte Carlo distributions: two-point, uniform,
    /// shifted-lognormal, or `all`.
    #[arg(long, default_value = "all")]
    pub distribution: String,
    /// Simulated paths; scientific notation such as 1e6 is accepted.
    #[arg(long, default_value = "100000", value_parser = parse_count)]
    pub paths: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; never changes the results.
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct IdentitiesArgs {
    /// Largest k on the fixed-rate grid.
    #[arg(long)]
    pub fixed_k_max: Option<u32>,
    /// Largest k on the stochastic grid.
    #[arg(long)]
    pub stochastic_k_max: Option<u32>,
    /// Test mode: perturb one formula so the suite must fail.
    #[arg(long, hide = true)]
    pub corrupt: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses a non-negative integer count, allowing `1e6` and `1_000_000`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let cleaned = s.trim().replace('_', "");
    if let Ok(n) = cleaned.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = cleaned.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= 2f64.powi(53) {
        Ok(x as u64)
    } else {
        Err(format!("`{s}` is not a whole number of paths"))
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut entries = Vec::new();
    for (number, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", number + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", number + 1)));
        }
        entries.push((key, value.trim().to_string()));
    }
    Ok(entries)
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut path = None;
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy();
        if text == "--config" {
            path = iter.next().map(PathBuf::from);
        } else if let Some(rest) = text.strip_prefix("--config=") {
            path = Some(PathBuf::from(rest));
        }
    }
    path
}

/// Splices config-file entries between the subcommand and its flags.
///
/// A `command` key supplies the subcommand when none is given.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let entries = parse_config(&text)?;
    let mut command = None;
    let mut flags = Vec::new();
    for (key, value) in entries {
        match key.as_str() {
            "command" => command = Some(value),
            "config" => return Err(CliError::Usage("config files cannot include other config files".into())),
            "corrupt" => {
                if value == "true" {
                    flags.push(OsString::from("--corrupt"));
                }
            }
            _ => {
                flags.push(OsString::from(format!("--{key}={value}")));
            }
        }
    }

    let mut args = args.into_iter();
    let mut out: Vec<OsString> = args.next().into_iter().collect();
    let rest: Vec<OsString> = args.collect();
    let has_command = rest.first().is_some_and(|a| !a.to_string_lossy().starts_with('-'));
    let mut rest = rest.into_iter();
    if has_command {
        out.extend(rest.next());
    } else if let Some(command) = command {
        out.push(command.into());
    }
    out.extend(flags);
    out.extend(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(args: &[&str]) -> Vec<OsString> {
        args.iter().map(OsString::from).collect()
    }

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("250000"), Ok(250_000));
        assert_eq!(parse_count("1_000"), Ok(1000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("ten").is_err());
    }

    #[test]
    fn config_lines() {
        let entries = parse_config("# rates\nj = 0.1\n\ns2=0.04 # variance\nfixed_k_max = 3\n").unwrap();
        assert_eq!(
            entries,
            vec![("j".into(), "0.1".into()), ("s2".into(), "0.04".into()), ("fixed-k-max".into(), "3".into())]
        );
        assert!(parse_config("j 0.1").is_err());
    }

    #[test]
    fn flags_override_config() {
        let dir = std::env::temp_dir().join(format!("annuity-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(&path, "command = moments\nj = 0.5\nn = 4\nq = -0.25\n").unwrap();
        let args = os(&["annuity", "--config", path.to_str().unwrap(), "--j", "0.1"]);
        let cli = Cli::try_parse_from(expand_config(args).unwrap()).unwrap();
        let Command::Moments(m) = cli.command else { panic!("expected moments") };
        assert_eq!(m.plan.j, 0.1);
        assert_eq!(m.plan.n, 4);
        assert_eq!(m.plan.q, Some(-0.25));
        std::fs::remove_dir_all(dir).unwrap();
    }
}
