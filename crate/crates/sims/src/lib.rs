//! Time-marching particle simulations driven by the `afmm` engine.
//!
//! * [`vortex`]: a shear layer of point vortices with Gaussian smoothing,
//!   convected with forward Euler.
//! * [`gravity`]: a rotating disc of equal masses under softened 2D gravity,
//!   integrated with velocity Störmer-Verlet.
//! * [`cylinder`]: flow past a circular cylinder, with mirror vortices for
//!   impermeability, boundary vortex emission for the no-slip condition and
//!   RK4 convection.
//!
//! Every simulation implements [`Simulation`], so a driver can step it while
//! retuning the engine between steps.

pub mod cylinder;
pub mod error;
pub mod gravity;
pub mod vortex;

use afmm::{EvalReport64, FmmEngine64, PhaseTimings, SourceSet64, WorkCounters, C64};

pub use cylinder::{cylinder_velocities, emit_boundary_vortices, rk4_convect, CylinderFlow, Emission};
pub use error::{Result, SimError};
pub use gravity::{gravity_forces, init_rotating_disc, pair_force, stormer_verlet_step, GravitySystem};
pub use vortex::{euler_step, init_shear_layer, smoother, vortex_velocities, VortexSystem};

/// Values at a set of points together with the engine time spent on them.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub values: Vec<C64>,
    pub timings: PhaseTimings,
    pub counters: WorkCounters,
}

impl Field {
    fn zeros(n: usize) -> Self {
        Self {
            values: vec![C64::new(0.0, 0.0); n],
            timings: PhaseTimings::default(),
            counters: WorkCounters::default(),
        }
    }

    /// Conjugated potentials, plus `offset(i)` added before conjugation.
    fn from_report(report: EvalReport64, offset: impl Fn(usize) -> C64) -> Self {
        Self {
            values: report.potentials.iter().enumerate().map(|(i, w)| (w + offset(i)).conj()).collect(),
            timings: report.timings,
            counters: report.counters,
        }
    }
}

/// Engine work of one time step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    /// Summed over all engine calls of the step.
    pub timings: PhaseTimings,
    pub counters: WorkCounters,
    pub evaluations: usize,
}

impl StepStats {
    fn add(&mut self, f: &Field) {
        self.timings += f.timings;
        self.counters += f.counters;
        self.evaluations += 1;
    }
}

/// One particle in a snapshot dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotRow {
    pub step: u64,
    pub id: usize,
    pub x: f64,
    pub y: f64,
    /// Circulation or mass.
    pub strength: f64,
    pub u: f64,
    pub v: f64,
}

impl SnapshotRow {
    pub const HEADER: [&'static str; 7] = ["step", "id", "x", "y", "strength", "u", "v"];

    pub fn fields(&self) -> [String; 7] {
        [
            self.step.to_string(),
            self.id.to_string(),
            format!("{:.12e}", self.x),
            format!("{:.12e}", self.y),
            format!("{:.12e}", self.strength),
            format!("{:.12e}", self.u),
            format!("{:.12e}", self.v),
        ]
    }
}

pub trait Simulation {
    fn name(&self) -> &'static str;

    /// Number of particles (physical vortices or bodies).
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Advance one time step.
    fn step(&mut self, engine: &mut FmmEngine64) -> Result<StepStats>;

    /// The source set the next step evaluates, for tree diagnostics.
    fn sources(&self) -> Result<SourceSet64>;

    fn snapshot(&self, step: u64) -> Vec<SnapshotRow>;
}

fn snapshot_rows(step: u64, pos: &[C64], strength: &[f64], vel: &[C64]) -> Vec<SnapshotRow> {
    pos.iter()
        .zip(strength)
        .enumerate()
        .map(|(id, (z, s))| {
            let w = vel.get(id).copied().unwrap_or_default();
            SnapshotRow {
                step,
                id,
                x: z.re,
                y: z.im,
                strength: *s,
                u: w.re,
                v: w.im,
            }
        })
        .collect()
}
