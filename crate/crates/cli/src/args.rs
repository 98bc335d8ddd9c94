use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "ksample", version, about = "E-variables for k-sample tests in one-parameter exponential families")]
pub struct Cli {
    /// Directory for report and CSV files; nothing is written when unset.
    #[arg(long, global = true, env = "KSAMPLE_OUT_DIR")]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate e-values on blocks or on grouped streams.
    Evaluate(EvaluateArgs),
    /// Approximate the reverse information projection and certify it.
    Project(ProjectArgs),
    /// Growth rates and their gaps for one alternative.
    Growth(GrowthArgs),
    /// Growth gap of two statistics over a grid of two-group alternatives.
    Heatmap(HeatmapArgs),
    /// Rejection rates of the e-process under optional stopping.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Run configuration JSON; flags given here override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Family: bernoulli, gaussian_free_mean, gaussian_free_variance, poisson,
    /// exponential, geometric or beta_fixed_alpha.
    #[arg(long)]
    pub family: Option<String>,
    /// Fixed parameter as key=value, e.g. variance=2 or alpha=1 (repeatable).
    #[arg(long = "fixed", value_name = "KEY=VALUE")]
    pub fixed: Vec<String>,
    /// Alternative means, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub mu: Option<Vec<f64>>,
    /// Read --mu as means of the raw beta observation instead of the statistic.
    #[arg(long)]
    pub u_mean: bool,
    /// Seed for every stochastic step.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Exit nonzero when any cell or trial fails.
    #[arg(long)]
    pub strict: bool,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    pub emit_config: bool,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Statistic: pseudo, gro_iid, cond or gro_m.
    #[arg(long)]
    pub kind: Option<String>,
    /// One block, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub block: Option<String>,
    /// File with one comma-separated block per line.
    #[arg(long, conflicts_with = "block")]
    pub blocks: Option<PathBuf>,
    /// CSV of `group,value` lines (groups numbered from 1), fed to the e-process.
    #[arg(long, conflicts_with_all = ["block", "blocks"])]
    pub stream: Option<PathBuf>,
    /// Significance level for the stream decision.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Mixture JSON from `project`, required for gro_m.
    #[arg(long)]
    pub mixture: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectMethodArg {
    Li,
    BruteForce,
    Both,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub method: Option<ProjectMethodArg>,
    /// Iterations of the greedy algorithm.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Points of the mu0 certification grid.
    #[arg(long)]
    pub mu0_points: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthMethodArg {
    Auto,
    Quadrature,
    MonteCarlo,
}

#[derive(Args, Debug)]
pub struct GrowthArgs {
    #[command(flatten)]
    pub common: Common,
    /// Statistics, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub kinds: Option<Vec<String>>,
    #[arg(long, value_enum)]
    pub method: Option<GrowthMethodArg>,
    /// Monte Carlo blocks.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Mixture JSON from `project`, required for gro_m.
    #[arg(long)]
    pub mixture: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HeatmapArgs {
    #[command(flatten)]
    pub common: Common,
    /// Two statistics `a,b`; cells hold E[log S_a - log S_b].
    #[arg(long, value_delimiter = ',')]
    pub kinds: Option<Vec<String>>,
    /// Grid points per axis.
    #[arg(long)]
    pub n: Option<usize>,
    /// Standard-parameter window `lo,hi`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub range: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub method: Option<GrowthMethodArg>,
    /// Monte Carlo blocks per cell.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Anti-diagonal offset of the second slice.
    #[arg(long, default_value_t = 9)]
    pub slice_offset: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyArg {
    FixedHorizon,
    Threshold,
    RandomBudget,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicyArg>,
    /// Block limit of the policy.
    #[arg(long)]
    pub max_blocks: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Draw data from the alternative instead of the null.
    #[arg(long)]
    pub under_alternative: bool,
    /// Common mean of the null truth; defaults to the alternative's mu0*.
    #[arg(long, allow_hyphen_values = true)]
    pub null_mu0: Option<f64>,
    /// Mixture JSON from `project`, required for gro_m.
    #[arg(long)]
    pub mixture: Option<PathBuf>,
}
