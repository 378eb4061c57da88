//! Time-stepping a simulation under a controller.

use std::time::Instant;

use afmm::rng::substream;
use afmm::{FmmConfig, FmmEngine64, Kernel, PhaseTimings};
use afmm_autotune::{Autotuner, Measurement, Params, TraceRow, TunerConfig, TunerKind};
use afmm_sims::{init_rotating_disc, init_shear_layer, CylinderFlow, Simulation, SnapshotRow};

use crate::args::{auto_levels, Common, SimKind, SimSetup};
use crate::error::{CliError, Result};
use crate::output::{sci, CsvOut};

/// Disc and cylinder defaults.
const DISC_RADIUS: f64 = 1.0;
const DISC_OMEGA: f64 = 1.0;
const CYLINDER_REYNOLDS: f64 = 550.0;
const CYLINDER_DT: f64 = 0.02;

pub fn default_n(sim: SimKind) -> usize {
    match sim {
        SimKind::Vortex => 16_000,
        SimKind::Galaxy => 10_000,
        SimKind::Cylinder => 64,
        SimKind::Oracle => 0,
    }
}

/// Fresh initial state; the same arguments always give the same state.
pub fn build_sim(setup: &SimSetup, n: usize, seed: u64) -> Result<Box<dyn Simulation>> {
    if let Some(dt) = setup.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(CliError::usage("--dt must be positive"));
        }
    }
    let sim: Box<dyn Simulation> = match setup.sim {
        SimKind::Vortex => {
            let mut s = init_shear_layer(n, setup.aspect, 1.0 / n.max(1) as f64)
                .map_err(|e| CliError::usage(e.to_string()))?;
            s.dt = setup.dt.unwrap_or(s.dt);
            Box::new(s)
        }
        SimKind::Galaxy => {
            let mut rng = substream(seed, "galaxy");
            let mut s = init_rotating_disc(n, DISC_RADIUS, DISC_OMEGA, &mut rng).map_err(|e| CliError::usage(e.to_string()))?;
            s.dt = setup.dt.unwrap_or(s.dt);
            Box::new(s)
        }
        SimKind::Cylinder => {
            let nu = 2.0 / CYLINDER_REYNOLDS;
            let s = CylinderFlow::new(1.0, 1.0, 0.0, nu, setup.dt.unwrap_or(CYLINDER_DT), n)
                .map_err(|e| CliError::usage(e.to_string()))?;
            Box::new(s)
        }
        SimKind::Oracle => return Err(CliError::usage("the oracle is not a simulation")),
    };
    Ok(sim)
}

pub fn engine_config(c: &Common, n: usize) -> Result<FmmConfig> {
    let cfg = FmmConfig {
        theta: c.theta0(),
        n_levels: c.nlevels0.unwrap_or_else(|| auto_levels(n)),
        tol: c.tol,
        kernel: c.kernel,
        backend: c.backend_kind()?,
        worker_threads: c.threads,
        ..Default::default()
    };
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(cfg)
}

pub fn tuner_config(c: &Common) -> TunerConfig {
    TunerConfig {
        cap: c.cap,
        ..Default::default()
    }
}

pub fn new_tuner(kind: TunerKind, c: &Common, start: Params) -> Result<Autotuner> {
    Autotuner::new(kind, tuner_config(c), start, substream(c.seed, "tuner")).map_err(|e| CliError::usage(e.to_string()))
}

/// One line of the timing CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingRow {
    pub iteration: u64,
    pub theta: f64,
    pub n_levels: usize,
    pub p: usize,
    pub timings: PhaseTimings,
}

impl TimingRow {
    pub const HEADER: [&'static str; 12] = [
        "iteration",
        "theta",
        "n_levels",
        "p",
        "t_partition",
        "t_p2m",
        "t_upward",
        "t_m2l",
        "t_p2p",
        "t_q",
        "t_total",
        "cpu_wait",
    ];

    pub fn fields(&self) -> [String; 12] {
        let t = &self.timings;
        [
            self.iteration.to_string(),
            format!("{:.6}", self.theta),
            self.n_levels.to_string(),
            self.p.to_string(),
            sci(t.t_partition),
            sci(t.t_p2m),
            sci(t.t_upward),
            sci(t.t_m2l),
            sci(t.t_p2p),
            sci(t.t_q),
            sci(t.t_total),
            t.cpu_wait_signal().map_or_else(String::new, sci),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct SimRun {
    pub kind: TunerKind,
    pub timing: Vec<TimingRow>,
    pub trace: Vec<TraceRow>,
    /// Sum of the per-step times the controller saw.
    pub total_time: f64,
    pub final_params: Params,
}

pub struct RunSpec<'a> {
    pub common: &'a Common,
    pub setup: &'a SimSetup,
    pub n: usize,
    pub steps: u64,
    pub kind: TunerKind,
    pub start: Params,
    /// Snapshot cadence in steps; 0 keeps only the first and last states.
    pub snapshot_every: u64,
}

/// Run the simulation, streaming snapshots to `snapshots` when given.
pub fn run_simulation(spec: &RunSpec, mut snapshots: Option<&mut CsvOut>) -> Result<SimRun> {
    let c = spec.common;
    if c.kernel != Kernel::Harmonic {
        return Err(CliError::usage("simulations need --kernel harmonic"));
    }
    let mut sim = build_sim(spec.setup, spec.n, c.seed)?;
    let mut cfg = engine_config(c, spec.n)?;
    cfg.theta = spec.start.theta;
    cfg.n_levels = spec.start.n_levels;
    let mut engine = FmmEngine64::new(cfg).map_err(|e| CliError::usage(e.to_string()))?;
    let mut tuner = new_tuner(spec.kind, c, spec.start)?;

    let write_snap = |sim: &dyn Simulation, step: u64, out: &mut Option<&mut CsvOut>| -> Result<()> {
        if let Some(w) = out.as_deref_mut() {
            for row in sim.snapshot(step) {
                w.row(row.fields())?;
            }
        }
        Ok(())
    };
    write_snap(sim.as_ref(), 0, &mut snapshots)?;

    let mut run = SimRun {
        kind: spec.kind,
        timing: Vec::with_capacity(spec.steps as usize),
        trace: Vec::with_capacity(spec.steps as usize),
        total_time: 0.0,
        final_params: spec.start,
    };
    for step in 0..spec.steps {
        let params = tuner.params();
        engine.set_params(params.theta, params.n_levels)?;
        let p = engine.p()?;
        let t0 = Instant::now();
        let stats = sim
            .step(&mut engine)
            .map_err(|e| CliError::Runtime(format!("step {step}: {e}")))?;
        let wall = t0.elapsed();
        let (timings, time) = crate::clock::step_time(c.clock, stats.timings, &stats.counters, params.n_levels, wall);
        let m = Measurement {
            iteration: step,
            time,
            cpu_wait: timings.cpu_wait_signal(),
        };
        let d = tuner.step(m)?;
        run.total_time += time;
        run.timing.push(TimingRow {
            iteration: step,
            theta: params.theta,
            n_levels: params.n_levels,
            p,
            timings,
        });
        run.trace.push(TraceRow::from_decision(spec.kind, &d, &m, p));
        let done = step + 1;
        let last = done == spec.steps;
        if last || (spec.snapshot_every > 0 && done % spec.snapshot_every == 0) {
            write_snap(sim.as_ref(), done, &mut snapshots)?;
        }
    }
    run.final_params = tuner.params();
    Ok(run)
}

pub fn snapshot_header() -> &'static [&'static str] {
    &SnapshotRow::HEADER
}
