use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Asymptotic ANOVA of the test error of two-layer ridge networks with
/// orthogonal initialization, with simulation and empirical counterparts.
#[derive(Debug, Parser)]
#[command(name = "ridge-anova", version, propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output file. Without it, output goes to `$RIDGE_ANOVA_OUT_DIR/<command>.<ext>`
    /// when that variable is set, and to stdout otherwise.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Output encoding.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Also write an SVG plot here.
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,

    /// Base seed (default 20240917).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads; 0 picks one per core. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// TOML file with flag values (`alpha = 1`, `k-grid = 20`, ...). Keys in a
    /// `[<command>]` table override top-level keys; flags override both.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    #[value(alias = "json-lines")]
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form curves along one axis, or a pi x delta heatmap.
    Theory(TheoryArgs),
    /// Simulation sweep along delta, pi or lambda.
    Sweep(SweepArgs),
    /// Direct Monte Carlo MSE along delta, with the theory curve.
    Simulate(SimArgs),
    /// Estimated ANOVA components along delta, with theory values.
    Anova(SimArgs),
    /// Bias, variance and main effects on tabular data along a grid of n.
    Empirical(EmpiricalArgs),
    /// Identity and consistency checks; exits 1 if any check fails.
    Check(CheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Theory(_) => "theory",
            Command::Sweep(_) => "sweep",
            Command::Simulate(_) => "simulate",
            Command::Anova(_) => "anova",
            Command::Empirical(_) => "empirical",
            Command::Check(_) => "check",
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Signal strength alpha (the signal variance is alpha^2).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Label-noise level sigma (the noise variance is sigma^2).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Parametrization level p/d, in (0, 1].
    #[arg(long)]
    pub pi: Option<f64>,
    /// Aspect ratio d/n.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Ridge penalty: a positive number or `optimal`.
    #[arg(long)]
    pub lambda: Option<String>,
    /// identity, scaled:<k>, crelu, relu, tanh or abs.
    #[arg(long)]
    pub activation: Option<String>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Explicit comma-separated values; overrides --from/--to/--points.
    #[arg(long)]
    pub values: Option<String>,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// delta, pi or lambda.
    #[arg(long)]
    pub axis: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Evaluate one quantity on a pi x delta grid instead of a curve.
    #[arg(long)]
    pub heatmap: bool,
    /// Quantity for --heatmap.
    #[arg(long)]
    pub quantity: Option<String>,
    /// Draw the plot as a cumulative stack of bias and variance components.
    #[arg(long)]
    pub stacked: bool,
}

#[derive(Debug, Args)]
pub struct SimFlags {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Training-set size.
    #[arg(long)]
    pub n: Option<usize>,
    /// gaussian, rademacher, uniform or ar1:<r>.
    #[arg(long)]
    pub data_law: Option<String>,
    /// Outer draws per run.
    #[arg(long)]
    pub k_outer: Option<usize>,
    /// Side of the crossed sample x initialization grid.
    #[arg(long)]
    pub k_grid: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// haar or canonical first-layer weights for the direct MSE estimator.
    #[arg(long)]
    pub weights: Option<String>,
    /// plugin or unbiased functional estimators.
    #[arg(long)]
    pub estimator: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub sim: SimFlags,
    /// delta, pi or lambda.
    #[arg(long)]
    pub axis: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// mse or functionals.
    #[arg(long)]
    pub kind: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub sim: SimFlags,
    /// Grid of delta values.
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct EmpiricalArgs {
    /// `synthetic` or a path to a CSV file with a header row.
    #[arg(long)]
    pub data: Option<String>,
    /// Response column: `last`, a 0-based index or a column name.
    #[arg(long)]
    pub response: Option<String>,
    /// Projection dimension as a fraction of the feature count.
    #[arg(long)]
    pub pi: Option<f64>,
    /// A positive number, or `select` to pick from {1,2,5} x 10^-j, j = 0..3.
    #[arg(long)]
    pub lambda: Option<String>,
    /// Subsample sizes: `a:b` (20 points), `a:b:step`, or a comma list.
    #[arg(long)]
    pub n_grid: Option<String>,
    /// Subsamples per grid.
    #[arg(long)]
    pub n_s: Option<usize>,
    /// Initializations per grid.
    #[arg(long)]
    pub n_i: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Fraction of rows used for training.
    #[arg(long)]
    pub split: Option<f64>,
    /// Synthetic data: signal strength alpha.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Synthetic data: noise level sigma.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Synthetic data: number of rows.
    #[arg(long)]
    pub rows: Option<usize>,
    /// Synthetic data: number of features.
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Identities,
    Monotonicity,
    Reduction,
    Divergence,
    All,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(value_enum, default_value = "all")]
    pub suite: Suite,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Random parameter tuples per randomized check.
    #[arg(long)]
    pub samples: Option<usize>,
}
