use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ensemble_grover::grover::Scenario;

#[derive(Debug, Parser)]
#[command(name = "ensemble-grover", version, about = "Ensemble Grover search failure statistics and critical polarizations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grover quantities and failure probabilities at a single point.
    Compute(ComputeArgs),
    /// Critical polarizations over ensemble sizes (fixed N) or database sizes (fixed p).
    Sweep(SweepArgs),
    /// Log-log least-squares fit of a sweep CSV.
    Fit(FitArgs),
    /// Monte Carlo run of the majority-vote protocol against the analytic rates.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Database size N; scientific notation such as 1e10 is accepted.
    #[arg(long = "n-db", value_parser = parse_count)]
    pub n_db: u64,
    /// Number of Grover iterates, overriding the scenario's choice.
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Option<Scenario>,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Ensemble size.
    #[arg(long, value_parser = parse_count)]
    pub m: Option<u64>,
    /// Polarization.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Also report the critical-polarization ratios for N -> gamma N.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Also report results for a classical cost of (qM)^alpha queries.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Failure-probability method: auto, exact-binomial, incomplete-beta or gaussian.
    #[arg(long, default_value = "auto")]
    pub method: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Fixed database size (ensemble-size sweep).
    #[arg(long = "n-db", value_parser = parse_count, conflicts_with_all = ["p_target", "n_list"])]
    pub n_db: Option<u64>,
    #[arg(long, requires = "n_db")]
    pub q: Option<u64>,
    #[arg(long, value_parser = parse_scenario, requires = "n_db")]
    pub scenario: Option<Scenario>,
    /// Smallest ensemble size; defaults to M_max / 2.
    #[arg(long = "m-min", value_parser = parse_count, requires = "n_db")]
    pub m_min: Option<u64>,
    /// Largest ensemble size; defaults to M_max.
    #[arg(long = "m-max", value_parser = parse_count, requires = "n_db")]
    pub m_max: Option<u64>,
    /// Number of evenly spaced ensemble sizes.
    #[arg(long, default_value_t = 51, requires = "n_db")]
    pub points: u64,
    /// Fixed classical success probability (database-size sweep).
    #[arg(long = "p-target")]
    pub p_target: Option<f64>,
    /// Comma-separated database sizes; defaults to 9 values from 1e8 to 1e16.
    #[arg(long = "n-list", value_parser = parse_count, value_delimiter = ',', requires = "p_target")]
    pub n_list: Option<Vec<u64>>,
    #[arg(long, default_value = "auto")]
    pub method: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Sweep CSV to fit.
    #[arg(long)]
    pub input: PathBuf,
    /// Also report log10 N at which each fitted line reaches this polarization.
    #[arg(long = "extrapolate-eps")]
    pub extrapolate_eps: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Database size, a power of two.
    #[arg(long = "n-db", value_parser = parse_count)]
    pub n_db: u64,
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Option<Scenario>,
    #[arg(long, value_parser = parse_count)]
    pub m: u64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, value_parser = parse_count, default_value = "100000")]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: ensemble_grover::Error| e.to_string())
}

/// Non-negative integer, written either plainly or in scientific notation.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !x.is_finite() || x < 0.0 || x.fract() != 0.0 {
        return Err(format!("`{s}` is not a non-negative integer"));
    }
    if x >= u64::MAX as f64 {
        return Err(format!("`{s}` is too large"));
    }
    Ok(x as u64)
}
