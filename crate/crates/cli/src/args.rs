use std::path::PathBuf;

use chaosdeg::LogBase;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "chaosdeg",
    version,
    about = "Entropic chaos degree and Lyapunov exponents of discrete maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chaos degree of one orbit.
    Ecd(EcdArgs),
    /// Lyapunov spectrum of one orbit.
    Lyapunov(LyapunovArgs),
    /// Parameter sweep of the chaos degree and/or Lyapunov spectrum.
    Sweep(SweepArgs),
    /// Dump a window of an orbit with cell assignments.
    Orbit(OrbitArgs),
}

#[derive(Debug, Args)]
pub struct MapArgs {
    /// Built-in map: bernoulli, baker, tinkerbell_a, tinkerbell_b, logistic.
    #[arg(long, required_unless_present = "map_file", conflicts_with = "map_file")]
    pub map: Option<String>,
    /// Map-spec file describing a custom map.
    #[arg(long, value_name = "PATH")]
    pub map_file: Option<PathBuf>,
    /// Parameter value, repeatable.
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
    /// Initial state, comma separated.
    #[arg(long, value_name = "X1,X2,..", allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long, default_value_t = chaosdeg::estimator::DEFAULT_ESCAPE_RADIUS)]
    pub escape_radius: f64,
    /// Iterate unit-slope doubling maps in plain floating point, which
    /// collapses their orbits onto a fixed point.
    #[arg(long)]
    pub float_shift: bool,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    #[arg(long, default_value_t = chaosdeg::estimator::DEFAULT_TRANSIENT)]
    pub transient: usize,
    /// Counted steps.
    #[arg(long, default_value_t = chaosdeg::estimator::DEFAULT_STEPS)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Write CSV here (plus a `.manifest` sidecar) instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EcdArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Cells per axis, comma separated; one value applies to every axis.
    #[arg(long, value_name = "N[,N..]")]
    pub cells: Option<String>,
    #[arg(long, default_value_t = LogBase::E)]
    pub log_base: LogBase,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Steps between QR re-orthonormalizations.
    #[arg(long, default_value_t = 1)]
    pub renorm_every: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Swept parameter and range; defaults to the built-in range for the map.
    #[arg(long, value_name = "K=LO:HI", allow_hyphen_values = true)]
    pub sweep: Option<String>,
    #[arg(long, default_value_t = chaosdeg::sweep::DEFAULT_POINTS)]
    pub points: usize,
    /// Comma list of `ecd`, `lyapunov`.
    #[arg(long, default_value = "ecd,lyapunov")]
    pub analyses: String,
    #[arg(long, value_name = "N[,N..]")]
    pub cells: Option<String>,
    #[arg(long, default_value_t = LogBase::E)]
    pub log_base: LogBase,
    #[arg(long, default_value_t = 1)]
    pub renorm_every: usize,
    /// Worker threads; 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// First emitted step.
    #[arg(long, default_value_t = 1001)]
    pub from: usize,
    /// Last emitted step, inclusive.
    #[arg(long, default_value_t = 4000)]
    pub to: usize,
    #[arg(long, value_name = "N[,N..]")]
    pub cells: Option<String>,
    #[command(flatten)]
    pub out: OutArgs,
}
