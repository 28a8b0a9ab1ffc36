use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "invitation", version, about = "On-demand agent invitation system: stability, fluid and simulation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a parameter set and print the stability report as JSON.
    Analyze(AnalyzeArgs),
    /// Integrate the fluid model from one initial state.
    Fluid(FluidArgs),
    /// Simulate the stochastic system.
    Simulate(SimulateArgs),
    /// Compare simulated, scaled paths against the fluid path.
    Compare(CompareArgs),
    /// Evaluate stability conditions over a two-parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ParamsSource {
    /// JSON parameter file with keys lambda, alpha, beta, mu, gamma, epsilon, r.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Bundled parameter set (ex1, ex2, ex3a-ex3d, ex4, ex5a, ex5b).
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct InitArgs {
    /// Raw initial state X,Y,Z.
    #[arg(long, allow_hyphen_values = true)]
    pub init: Option<String>,
    /// Fluid initial state x,y,w.
    #[arg(long, allow_hyphen_values = true)]
    pub finit: Option<String>,
}

#[derive(Debug, Args)]
pub struct FluidFlags {
    /// Integration step.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Convergence threshold on the state norm [default: 1e-4 (1 + |init|)].
    #[arg(long)]
    pub conv_tol: Option<f64>,
    /// Time the norm must stay below the threshold.
    #[arg(long, default_value_t = 1.0)]
    pub conv_hold: f64,
}

#[derive(Debug, Args)]
pub struct SimFlags {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output sampling step.
    #[arg(long, default_value_t = 0.01)]
    pub sample_dt: f64,
    /// Number of independent replications.
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: ParamsSource,
    /// Also write analyze.json into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FluidArgs {
    #[command(flatten)]
    pub source: ParamsSource,
    #[command(flatten)]
    pub init: InitArgs,
    #[command(flatten)]
    pub fluid: FluidFlags,
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: ParamsSource,
    #[command(flatten)]
    pub init: InitArgs,
    #[command(flatten)]
    pub sim: SimFlags,
    #[arg(long, default_value_t = 40.0)]
    pub t_end: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub source: ParamsSource,
    #[command(flatten)]
    pub init: InitArgs,
    #[command(flatten)]
    pub fluid: FluidFlags,
    #[command(flatten)]
    pub sim: SimFlags,
    #[arg(long, default_value_t = 20.0)]
    pub t_end: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: ParamsSource,
    /// Grid axis `name=min:max:points`; give exactly two.
    #[arg(long = "axis", required = true, num_args = 1)]
    pub axes: Vec<String>,
    /// Integrate the fluid model from the standard initial states at every point.
    #[arg(long)]
    pub with_fluid: bool,
    #[command(flatten)]
    pub fluid: FluidFlags,
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}
