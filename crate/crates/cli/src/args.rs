//! Flag definitions and literal parsers.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gncert::majorant::MajorantKind;

#[derive(Debug, Parser)]
#[command(
    name = "gncert",
    about = "Gauss-Newton solver with convergence certification",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run Gauss-Newton on a registry problem; writes a trace CSV and a
    /// summary JSON.
    Solve(SolveArgs),
    /// Build a convergence certificate for a problem.
    Certify(CommonArgs),
    /// Compare the certified radius against the empirically probed one.
    Radius(CommonArgs),
    /// Demonstrate the period-2 cycle of the worst-case problem at rho.
    #[command(name = "worst-case")]
    WorstCase(WorstCaseArgs),
    /// Run the registry-wide validation battery.
    Suite(SuiteArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Problem name: linear, scalar_quadratic, rosenbrock, ds_family,
    /// exp_fit_clean, exp_fit_noisy, or worst_case.
    #[arg(long)]
    pub problem: String,
    /// Problem parameter as key=value (repeatable), e.g. --param lambda=2.
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
    /// Majorant spec: lipschitz:K=2 or smale:gamma=1. Defaults to the
    /// registry's exact constant, or a sampled estimate when unknown.
    #[arg(long)]
    pub majorant: Option<String>,
    /// Pseudo-inverse norm at the solution; required for worst_case.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Seed for all sampling (flag > GN_CERTIFY_SEED env > 42).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path; JSON is written here (and a trace CSV next to it for
    /// solve). Without it, JSON goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Start point: comma-separated decimals ("1.3" or "0.5,2.0") or
    /// "auto:DELTA,DIRSEED" for a seeded direction at distance DELTA
    /// from the solution.
    #[arg(long)]
    pub x0: String,
    /// Gradient-norm stopping tolerance override.
    #[arg(long = "tol-grad")]
    pub tol_grad: Option<f64>,
    /// Iteration budget.
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct WorstCaseArgs {
    /// Majorant spec: lipschitz:K=1 or smale:gamma=1.
    #[arg(long)]
    pub majorant: String,
    /// Pseudo-inverse norm at the solution.
    #[arg(long)]
    pub beta: f64,
    /// Domain radius of the scalar worst-case problem.
    #[arg(long, default_value_t = 1e3)]
    pub kappa: f64,
    /// Start override; defaults to rho (the cycle point).
    #[arg(long)]
    pub x0: Option<f64>,
    /// Number of Gauss-Newton iterations to record.
    #[arg(long = "max-iters", default_value_t = 10)]
    pub max_iters: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Flag > GN_CERTIFY_SEED env var > 42.
pub fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("GN_CERTIFY_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(42)
}

pub fn parse_params(params: &[String]) -> Result<BTreeMap<String, f64>, String> {
    let mut map = BTreeMap::new();
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| format!("parameter '{p}' is not key=value"))?;
        let value: f64 = v
            .parse()
            .map_err(|_| format!("parameter '{p}' has a non-numeric value"))?;
        map.insert(k.to_string(), value);
    }
    Ok(map)
}

/// Parses "lipschitz:K=2" / "smale:gamma=1".
pub fn parse_majorant(spec: &str) -> Result<MajorantKind, String> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let params = parse_params(
        &rest
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| s.to_string())
            .collect::<Vec<_>>(),
    )?;
    match kind {
        "lipschitz" => {
            let k = params
                .get("K")
                .or_else(|| params.get("k"))
                .copied()
                .ok_or("lipschitz majorant needs K=<value>")?;
            if k.is_nan() || k <= 0.0 {
                return Err("lipschitz constant must be > 0".into());
            }
            Ok(MajorantKind::Lipschitz { k })
        }
        "smale" => {
            let gamma = params
                .get("gamma")
                .copied()
                .ok_or("smale majorant needs gamma=<value>")?;
            if gamma.is_nan() || gamma <= 0.0 {
                return Err("gamma must be > 0".into());
            }
            Ok(MajorantKind::Smale { gamma })
        }
        other => Err(format!(
            "unknown majorant kind '{other}' (expected lipschitz or smale)"
        )),
    }
}

/// Parses an x0 literal: a comma-separated vector or "auto:DELTA,DIRSEED".
pub enum StartSpec {
    Explicit(Vec<f64>),
    Auto { delta: f64, dir_seed: u64 },
}

pub fn parse_x0(spec: &str) -> Result<StartSpec, String> {
    if let Some(rest) = spec.strip_prefix("auto:") {
        let (delta, seed) = rest
            .split_once(',')
            .ok_or("auto start is auto:DELTA,DIRSEED")?;
        let delta: f64 = delta.parse().map_err(|_| "auto delta is not numeric")?;
        let dir_seed: u64 = seed
            .parse()
            .map_err(|_| "auto dir-seed is not an integer")?;
        if delta.is_nan() || delta <= 0.0 {
            return Err("auto delta must be > 0".into());
        }
        return Ok(StartSpec::Auto { delta, dir_seed });
    }
    let values: Result<Vec<f64>, _> = spec.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if !v.is_empty() => Ok(StartSpec::Explicit(v)),
        _ => Err(format!("cannot parse start point '{spec}'")),
    }
}
