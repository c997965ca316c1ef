use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 20240901;

#[derive(Debug, Parser)]
#[command(name = "cbtest", version, about = "Two-sample tests for unlabelled pairs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Test equality of the two distributions behind a CSV of unlabelled pairs.
    Test(TestArgs),
    /// Simulate the distribution of a statistic and write its ECDF.
    Simulate(SimulateArgs),
    /// Asymptotic signal-to-noise ratio of a directed test.
    Snr(SnrArgs),
    /// Write the data behind the figures.
    Figures(FiguresArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Test(_) => "test",
            Command::Simulate(_) => "simulate",
            Command::Snr(_) => "snr",
            Command::Figures(_) => "figures",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatisticName {
    KsSym,
    KsFull,
    Linear,
    Maxima,
    CrossProb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailName {
    Right,
    Left,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    /// Both coordinates uniform.
    NullUniform,
    /// Both coordinates from (x + x²)/2.
    NullMix,
    /// Both coordinates from x².
    NullSquare,
    /// Null at the base distribution of `--alt`.
    NullAlt,
    /// The alternative given by `--alt`.
    Alt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Linear,
    Maxima,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TestArgs {
    /// CSV file with two numeric columns.
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub statistic: StatisticName,
    /// Builtin name, inline JSON, or JSON file; required for linear and maxima.
    #[arg(long)]
    pub alt: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Extra level for a critical value, besides 0.10, 0.05 and 0.01.
    #[arg(long)]
    pub level: Option<f64>,
    /// Grid cells per axis for KS suprema.
    #[arg(long, default_value_t = cbtest::statistics::DEFAULT_MAX_CELLS)]
    pub grid: usize,
    #[arg(long, value_enum)]
    pub tail: Option<TailName>,
    /// Write the report here (plus a manifest) as well as to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub statistic: StatisticName,
    #[arg(long, value_enum, default_value = "null-uniform")]
    pub model: ModelName,
    #[arg(long)]
    pub alt: Option<String>,
    /// Overrides the alternative's ε.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output CSV; a `.json` sidecar and `.manifest.json` are written beside it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = cbtest::statistics::DEFAULT_MAX_CELLS)]
    pub grid: usize,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SnrArgs {
    #[arg(long)]
    pub alt: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "linear")]
    pub variant: Variant,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Level for the Gaussian power approximation.
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    /// Unused by the computation; echoed for uniformity.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FiguresArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[arg(long, default_value_t = cbtest::statistics::DEFAULT_MAX_CELLS)]
    pub grid: usize,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
