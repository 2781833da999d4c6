use clap::{Args, Parser, Subcommand, ValueEnum};
use fastdiff::Variant;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "fastdiff", version, about = "Stationary states, evolution and functional inequalities for radial fast diffusion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a stationary state and write its snapshot.
    #[command(args_override_self = true)]
    Stationary(StationaryArgs),
    /// Integrate in time and write the diagnostics series and the final snapshot.
    #[command(args_override_self = true)]
    Evolve(EvolveArgs),
    /// Weighted Hardy-Poincaré constant around a stationary state.
    #[command(args_override_self = true)]
    Hp(HpArgs),
    /// Random perturbation test of minimality for the reverse HLS quotient.
    #[command(args_override_self = true)]
    Rhls(RhlsArgs),
    /// Randomized search for negative values of the constrained interaction form.
    #[command(args_override_self = true)]
    Positivity(PositivityArgs),
    /// Fit a decay law to one column of a diagnostics series.
    #[command(args_override_self = true)]
    Rates(RatesArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Recompute and compare with the checksums in the existing manifest; writes nothing.
    #[arg(long)]
    pub check: bool,
    /// File of `key=value` lines used as defaults for the other flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Model {
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    #[arg(long)]
    pub q: f64,
    /// Domain radius; defaults to the tail rule.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub cells: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct StationaryArgs {
    #[arg(long)]
    pub variant: Variant,
    #[command(flatten)]
    pub model: Model,
    /// Total mass (drift only; the mean-field state has mass one).
    #[arg(long)]
    pub mass: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub variant: Variant,
    #[command(flatten)]
    pub model: Model,
    #[arg(long)]
    pub mass: Option<f64>,
    /// Initial snapshot; the grid is taken from the file. Without it a built-in datum is used.
    #[arg(long)]
    pub initial: Option<PathBuf>,
    /// Second initial snapshot on the same grid, run with the same steps; adds an `l1_distance` column.
    #[arg(long)]
    pub compare: Option<PathBuf>,
    /// Built-in drift datum: lower multiple of the stationary state.
    #[arg(long, default_value_t = 0.5)]
    pub lower: f64,
    /// Built-in drift datum: upper multiple of the stationary state.
    #[arg(long, default_value_t = 2.0)]
    pub upper: f64,
    /// Built-in mean-field datum: envelope offset.
    #[arg(long, default_value_t = 0.3)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.1)]
    pub snapshot_every: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub dt_init: f64,
    #[arg(long, default_value_t = 0.9)]
    pub cfl: f64,
    #[arg(long)]
    pub dt_max: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct HpArgs {
    #[arg(long, default_value = "drift")]
    pub variant: Variant,
    #[command(flatten)]
    pub model: Model,
    #[arg(long)]
    pub mass: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct RhlsArgs {
    #[command(flatten)]
    pub model: Model,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Perturbation size.
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
    /// Radial extent of the perturbation bumps.
    #[arg(long, default_value_t = 3.0)]
    pub reach: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct PositivityArgs {
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 5.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 200)]
    pub cells: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 3.0)]
    pub reach: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    Auto,
    Exponential,
    Algebraic,
}

#[derive(Debug, Clone, Args)]
pub struct RatesArgs {
    /// Diagnostics CSV as written by `evolve`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "weighted_l2")]
    pub column: String,
    #[arg(long, value_enum, default_value_t = FitKind::Auto)]
    pub kind: FitKind,
    /// Start of the fit window; without `--to` the last half of the series is used.
    #[arg(long, requires = "to")]
    pub from: Option<f64>,
    #[arg(long, requires = "from")]
    pub to: Option<f64>,
    /// Samples at or below this value are dropped.
    #[arg(long, default_value_t = 0.0)]
    pub floor: f64,
    #[command(flatten)]
    pub common: Common,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Stationary(_) => "stationary",
            Command::Evolve(_) => "evolve",
            Command::Hp(_) => "hp",
            Command::Rhls(_) => "rhls",
            Command::Positivity(_) => "positivity",
            Command::Rates(_) => "rates",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Stationary(a) => &a.common,
            Command::Evolve(a) => &a.common,
            Command::Hp(a) => &a.common,
            Command::Rhls(a) => &a.common,
            Command::Positivity(a) => &a.common,
            Command::Rates(a) => &a.common,
        }
    }
}
