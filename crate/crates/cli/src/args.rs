//! Command-line flags.

use std::path::PathBuf;

use afmm::{BackendKind, Kernel};
use afmm_autotune::TunerKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "afmm", version, about = "Balanced adaptive 2D FMM: sweeps, tuned simulations and controller experiments")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Time one evaluation per θ on a grid (fixed points, fixed n_levels).
    Sweep(SweepArgs),
    /// Run a simulation under a controller.
    Simulate(SimulateArgs),
    /// Repeat a tuned run across cost caps.
    Capsweep(CapsweepArgs),
    /// Run the controllers against a synthetic runtime landscape.
    Lab(LabArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    Serial,
    Pool,
    Throttled,
}

/// Where iteration times come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Clock {
    /// Measured wall time.
    Wall,
    /// Deterministic cost model over the operation counts.
    Model,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    Vortex,
    Galaxy,
    Cylinder,
    /// Synthetic runtime landscape instead of a simulation (capsweep only).
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Distribution {
    Uniform,
    Line,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    /// One static valley.
    Single,
    /// A valley drifting under a saw-tooth ripple.
    Drift,
    /// Two valleys; the deeper one changes a quarter into the run.
    Switch,
}

pub const DEFAULT_THETA0: f64 = 0.5;

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Number of points, bodies or vortices (collocation points for the cylinder).
    #[arg(long)]
    pub n: Option<usize>,
    /// Time steps or controller iterations.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Initial θ; 0.5 unless the subcommand picks another start.
    #[arg(long)]
    pub theta0: Option<f64>,
    /// Initial tree depth; chosen from N when omitted.
    #[arg(long)]
    pub nlevels0: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value = "harmonic")]
    pub kernel: Kernel,
    #[arg(long, value_enum, default_value = "serial")]
    pub backend: BackendChoice,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Added latency of the throttled backend, milliseconds.
    #[arg(long, default_value_t = 2.0)]
    pub latency_ms: f64,
    /// Compute slowdown factor of the throttled backend.
    #[arg(long, default_value_t = 1.0)]
    pub slowdown: f64,
    /// Controller; `simulate` defaults to none, `capsweep` to at3b and
    /// `lab` runs all four.
    #[arg(long)]
    pub tuner: Option<TunerKind>,
    /// Budget for n_levels probes, as a fraction of runtime.
    #[arg(long, default_value_t = 0.1)]
    pub cap: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "wall")]
    pub clock: Clock,
    /// key=value file with defaults for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Common {
    pub fn theta0(&self) -> f64 {
        self.theta0.unwrap_or(DEFAULT_THETA0)
    }

    pub fn backend_kind(&self) -> Result<BackendKind> {
        Ok(match self.backend {
            BackendChoice::Serial => BackendKind::Serial,
            BackendChoice::Pool => BackendKind::Pool { threads: self.threads },
            BackendChoice::Throttled => {
                if !(self.latency_ms >= 0.0 && self.latency_ms.is_finite()) {
                    return Err(CliError::usage("--latency-ms must be non-negative"));
                }
                BackendKind::Throttled {
                    latency: std::time::Duration::from_secs_f64(self.latency_ms / 1e3),
                    slowdown: self.slowdown,
                }
            }
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0.35)]
    pub theta_min: f64,
    #[arg(long, default_value_t = 0.65)]
    pub theta_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub theta_step: f64,
    #[arg(long, value_enum, default_value = "both")]
    pub dist: Distribution,
    /// Evaluations per grid point; the fastest is reported.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
}

/// Simulation setup shared by `simulate` and `capsweep`.
#[derive(Debug, Clone, Args)]
pub struct SimSetup {
    #[arg(long, value_enum, default_value = "vortex")]
    pub sim: SimKind,
    /// Length over height of the shear layer.
    #[arg(long, default_value_t = 8.0)]
    pub aspect: f64,
    /// Override the simulation's default time step.
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub setup: SimSetup,
    /// Snapshot cadence in steps; 0 writes the first and last state only.
    #[arg(long, default_value_t = 0)]
    pub snapshot_every: u64,
    /// Also run an untuned copy from the same initial state and report the speedup.
    #[arg(long)]
    pub paired: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CapsweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub setup: SimSetup,
    /// Comma-separated cap values.
    #[arg(long, default_value = "0,0.02,0.05,0.1,0.2")]
    pub caps: String,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
}

#[derive(Debug, Clone, Args)]
pub struct LabArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "single")]
    pub oracle: OracleKind,
    /// Relative noise amplitude of the oracle.
    #[arg(long, default_value_t = 0.002)]
    pub noise: f64,
}

impl CapsweepArgs {
    pub fn cap_list(&self) -> Result<Vec<f64>> {
        let caps: Vec<f64> = self
            .caps
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| CliError::usage(format!("--caps: `{s}`: {e}"))))
            .collect::<Result<_>>()?;
        if caps.is_empty() || caps.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(CliError::usage("--caps must list non-negative numbers"));
        }
        Ok(caps)
    }
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Sweep(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::Capsweep(a) => &a.common,
            Command::Lab(a) => &a.common,
        }
    }
}

/// Tree depth giving roughly 40 points per finest box.
pub fn auto_levels(n: usize) -> usize {
    let per_box = (n as f64 / 40.0).max(1.0);
    (per_box.log(4.0).round() as usize + 1).clamp(1, 12)
}
