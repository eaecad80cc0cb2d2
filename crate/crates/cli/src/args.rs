use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Parser)]
#[command(
    name = "robust-risk",
    version,
    about = "Robust expectiles, quantiles and OCEs under transport-penalized model uncertainty"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a single risk measure and print it.
    Measure(MeasureArgs),
    /// Sweep robust expectiles over an (alpha, delta) grid and write CSV.
    Sweep(SweepArgs),
    /// Run a verification suite and print one PASS/FAIL line per check.
    Verify(VerifyArgs),
}

/// Where the baseline law comes from; exactly one is required.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct PriorSource {
    /// Prior as `family:params`, e.g. `normal:0,1`, `exponential:1`,
    /// `t:5`, `empirical:1,2,3`.
    #[arg(long)]
    pub prior: Option<String>,
    /// JSON prior specification file.
    #[arg(long, value_name = "PATH")]
    pub prior_file: Option<PathBuf>,
    /// CSV sample file with rows `value[,weight]`.
    #[arg(long, value_name = "PATH")]
    pub samples: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureKind {
    Var,
    Expectile,
    RobustExpectile,
    Oce,
    Quantile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PenaltyKind {
    Linear,
    Ball,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossKind {
    /// `alpha x^+ + (1 - alpha) x^-`
    Pinball,
    /// `alpha (x^+)^2 + (1 - alpha) (x^-)^2`
    AsymQuadratic,
    /// `alpha (x^+)^2`
    ExcessSquare,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(value_enum)]
    pub measure: MeasureKind,
    #[command(flatten)]
    pub prior: PriorSource,
    /// Replace the prior by this many seeded draws from it.
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_enum)]
    pub penalty: Option<PenaltyKind>,
    /// JSON penalization, e.g. `{"penalty":"piecewise","breakpoints":[[0,1],[2,3]]}`.
    #[arg(long, value_name = "JSON", conflicts_with_all = ["penalty", "delta"])]
    pub penalty_json: Option<String>,
    /// Transport cost exponent.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub cost_p: u8,
    /// Loss for `oce` and `quantile` (defaults: `excess-square` for `oce`,
    /// `pinball` or `asym-quadratic` for `quantile` by cost exponent).
    #[arg(long, value_enum)]
    pub loss: Option<LossKind>,
    /// Argument tolerance of the nested searches.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Confine the location search to the support of an empirical prior.
    #[arg(long)]
    pub support_search: bool,
    /// Print solver diagnostics to stderr.
    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub prior: PriorSource,
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub penalty: PenaltyKind,
    /// Comma-separated levels.
    #[arg(long = "alpha", default_value = "0.1,0.3,0.7,0.9")]
    pub alphas: String,
    /// Comma-separated values or `start:stop:step` (defaults: `1:10:0.5`
    /// for linear, `0:2:0.1` for ball).
    #[arg(long = "delta")]
    pub deltas: Option<String>,
    /// CSV destination (stdout when absent).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Also render an SVG line chart.
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Axioms,
    Duality,
    Transforms,
    Reductions,
    Trends,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}
