use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "treesearch", version, about = "Quantum search on balanced binary trees")]
pub struct Cli {
    /// Directory for output files; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// `key = value` file overriding the defaults; flags win over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reduced Hamiltonian of one instance.
    Reduce(ReduceArgs),
    /// Marked-site amplitude over time.
    Evolve(EvolveArgs),
    /// Efficiency and peak probability against gamma.
    Sweep(SweepArgs),
    /// Scaling exponent of the efficiency metric.
    Scaling(ScalingArgs),
    /// Classical random-walk hitting times.
    Classical(ClassicalArgs),
    /// Closeness and betweenness per level.
    Centrality(CentralityArgs),
    /// Closed-form approximations for a marked root.
    Analytic(AnalyticArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Reduce(_) => "reduce",
            Command::Evolve(_) => "evolve",
            Command::Sweep(_) => "sweep",
            Command::Scaling(_) => "scaling",
            Command::Classical(_) => "classical",
            Command::Centrality(_) => "centrality",
            Command::Analytic(_) => "analytic",
        }
    }
}

#[derive(Debug, Args)]
pub struct Instance {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub l: Option<u32>,
    /// Defaults to the rule-of-thumb optimum for the level.
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PeakArgs {
    /// Peak height in units of the initial probability.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub horizon_factor: Option<f64>,
    #[arg(long)]
    pub samples_per_wavelength: Option<usize>,
    #[arg(long)]
    pub max_samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub instance: Instance,
    /// Check the reduction against the full system (n <= 12).
    #[arg(long)]
    pub verify: bool,
    /// Also write the full tree as `edges.csv` (needs --out, n <= 14).
    #[arg(long)]
    pub edges: bool,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub instance: Instance,
    /// Default `4 sqrt(N)`.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Add `|approx|` from a closed form (marked root only).
    #[arg(long, value_enum)]
    pub approx: Option<ApproxForm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ApproxForm {
    SmallGamma,
    Sine,
    Pair,
}

impl ApproxForm {
    pub fn name(self) -> &'static str {
        match self {
            ApproxForm::SmallGamma => "small-gamma",
            ApproxForm::Sine => "sine",
            ApproxForm::Pair => "pair",
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long)]
    pub gamma_max: Option<f64>,
    #[arg(long)]
    pub coarse_step: Option<f64>,
    #[arg(long)]
    pub fine_step: Option<f64>,
    #[arg(long)]
    pub refine_halfwidth: Option<f64>,
    #[command(flatten)]
    pub peak: PeakArgs,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    /// Depths as `start:stop:step`.
    #[arg(long)]
    pub n: Option<String>,
    /// Marked level proportional to depth, `l = round(ratio n)`.
    #[arg(long, conflicts_with = "l")]
    pub l_ratio: Option<f64>,
    /// Fixed marked level.
    #[arg(long)]
    pub l: Option<u32>,
    /// Fixed gamma; the rule of thumb when absent.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// `all`, `upper` or `from:N`.
    #[arg(long)]
    pub window: Option<String>,
    /// Depth of the explicit reduction check; 0 skips it.
    #[arg(long)]
    pub verify_n: Option<u32>,
    #[command(flatten)]
    pub peak: PeakArgs,
}

#[derive(Debug, Args)]
pub struct ClassicalArgs {
    #[arg(long)]
    pub n: Option<u32>,
    /// Monte Carlo walkers; 0 disables the simulation.
    #[arg(long)]
    pub mc_walks: Option<u64>,
    #[arg(long)]
    pub mc_level: Option<u32>,
    #[arg(long)]
    pub mc_batches: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CentralityArgs {
    #[arg(long)]
    pub n: Option<u32>,
    /// Report a single level instead of the table.
    #[arg(long)]
    pub l: Option<u32>,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Defaults to `sine` at gamma = 1 and `small-gamma` otherwise.
    #[arg(long, value_enum)]
    pub form: Option<ApproxForm>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}
