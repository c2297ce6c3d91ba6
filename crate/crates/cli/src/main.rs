//! `homonym`: estimate how often people share a first and last name.

mod commands;
mod manifest;
mod spec_parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use homonym_core::Transform;
use serde::Serialize;

use crate::spec_parse::{parse_grid, parse_period_file, parse_target, parse_window};

#[derive(Debug, Parser)]
#[command(name = "homonym", version, about = "Homonym proportions by Monte Carlo simulation")]
struct Cli {
    /// Seed for every random stream; recorded in each run manifest.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a Zipf law to a `label,count` frequency table.
    FitZipf(FitZipfArgs),
    /// Simulate a homonym-proportion curve over a grid of group sizes.
    Simulate(SimulateArgs),
    /// Fit a probit/logit line on log n and extrapolate a curve.
    Extrapolate(ExtrapolateArgs),
    /// Pearson residuals for the top names' first-by-last table.
    Independence(IndependenceArgs),
    /// Per-period concentration and independence curves.
    PeriodReport(PeriodReportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct FitZipfArgs {
    /// CSV with header `label,count`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Draw observed (first, last) pairs.
    Pair,
    /// Draw first and last names independently from their marginals.
    Independent,
}

#[derive(Debug, Args, Serialize)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["pairs", "freq", "zipf", "uniform"])))]
pub struct SimulateArgs {
    /// Pair records with header `first,last`.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Single `label,count` frequency table.
    #[arg(long)]
    pub freq: Option<PathBuf>,
    /// Synthetic Zipf law: exponent and support size.
    #[arg(long, num_args = 2, value_names = ["ALPHA", "K"])]
    pub zipf: Option<Vec<String>>,
    /// Synthetic uniform law over K labels.
    #[arg(long, value_name = "K")]
    pub uniform: Option<usize>,
    /// How pair records are resampled.
    #[arg(long, value_enum, default_value_t = Mode::Pair)]
    pub mode: Mode,
    /// `start:stop:points` (log-spaced) or a comma list.
    #[arg(long, default_value = "10:100000:25", value_parser = grid_arg)]
    pub grid: Grid,
    #[arg(long, default_value_t = homonym_core::collision::DEFAULT_REPLICATES)]
    pub replicates: u32,
    /// Worker threads; 0 uses every core. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Also write per-replicate values to `replicates.csv`.
    #[arg(long)]
    pub long: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ExtrapolateArgs {
    /// Curve CSV with at least `n,mean` (as written by `simulate`).
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long, default_value = "probit")]
    #[serde(serialize_with = "as_display")]
    pub transform: Transform,
    #[arg(long, default_value = "5000:50000", value_parser = parse_window)]
    pub window: (f64, f64),
    /// Group sizes to predict, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1000000", value_parser = parse_target)]
    pub targets: Vec<f64>,
    /// Weight points by inverse variance on the transformed scale.
    #[arg(long)]
    pub weighted: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct IndependenceArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    /// Number of most frequent first and last names kept.
    #[arg(long, default_value_t = homonym_core::pairs::DEFAULT_TOP)]
    pub m: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PeriodReportArgs {
    /// First-name table for a period, as `PERIOD=path`; repeatable.
    #[arg(long = "first", required = true, value_parser = parse_period_file)]
    pub first: Vec<(String, PathBuf)>,
    /// Last-name table for a period, as `PERIOD=path`; repeatable.
    #[arg(long = "last", required = true, value_parser = parse_period_file)]
    pub last: Vec<(String, PathBuf)>,
    #[arg(long, default_value = "10000:200000:12", value_parser = grid_arg)]
    pub grid: Grid,
    #[arg(long, default_value_t = homonym_core::collision::DEFAULT_REPLICATES)]
    pub replicates: u32,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Ascending group sizes.
#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<u64>);

fn grid_arg(s: &str) -> Result<Grid, String> {
    parse_grid(s).map(Grid)
}

fn as_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Domain and usage errors exit with 2, everything else with 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    let domain = err
        .chain()
        .any(|c| c.is::<homonym_core::Error>() || c.is::<commands::UsageError>());
    if domain {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = cli.seed;
    let result = match cli.command {
        Command::FitZipf(a) => commands::fit_zipf(seed, a),
        Command::Simulate(a) => commands::simulate(seed, a),
        Command::Extrapolate(a) => commands::extrapolate(seed, a),
        Command::Independence(a) => commands::independence(seed, a),
        Command::PeriodReport(a) => commands::period_report(seed, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
