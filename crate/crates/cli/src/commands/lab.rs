//! `lab`: controllers against a synthetic runtime landscape.

use std::fmt::Write as _;

use afmm_autotune::{run_controller, Params, TraceRow, Trajectory, TunerKind, WorkloadOracle};

use crate::args::{LabArgs, OracleKind};
use crate::driver::{new_tuner, tuner_config};
use crate::error::{CliError, Result};
use crate::output::{sci, CsvOut};

pub const DEFAULT_STEPS: u64 = 500;
const NL_OPT: usize = 4;

/// The landscape for `kind` over a run of `steps` iterations.
pub fn oracle(kind: OracleKind, steps: u64, noise: f64) -> WorkloadOracle {
    match kind {
        OracleKind::Single => WorkloadOracle::single_basin(0.55, NL_OPT),
        OracleKind::Drift => WorkloadOracle::drifting(0.3, 2.5e-4, NL_OPT).with_sawtooth(0.1, 0.05),
        OracleKind::Switch => WorkloadOracle::switching(0.4, 0.6, steps / 4, NL_OPT),
    }
    .with_noise(noise)
}

/// Default initial θ: off the optimum, inside the basin the run starts in.
pub fn default_start(kind: OracleKind) -> f64 {
    match kind {
        OracleKind::Single => 0.45,
        OracleKind::Drift => 0.3,
        OracleKind::Switch => 0.45,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabSummary {
    pub controller: TunerKind,
    pub final_theta: f64,
    pub final_n_levels: usize,
    pub optimum_theta: f64,
    /// Final θ within two base steps of the final optimum.
    pub converged: bool,
    /// Iteration from which θ stays within two base steps of the final optimum.
    pub settled_at: Option<u64>,
    /// Iterations from the basin switch until θ settles in the new basin.
    pub recover_iterations: Option<u64>,
    pub mean_time_last: f64,
    pub nl_probes: u64,
    pub probe_fraction: f64,
}

impl LabSummary {
    pub const HEADER: [&'static str; 10] = [
        "controller_id",
        "final_theta",
        "final_n_levels",
        "optimum_theta",
        "converged",
        "settled_at",
        "recover_iterations",
        "mean_time_last100",
        "nl_probes",
        "probe_fraction",
    ];

    pub fn fields(&self) -> [String; 10] {
        let opt = |v: Option<u64>| v.map_or_else(String::new, |x| x.to_string());
        [
            self.controller.id().to_string(),
            format!("{:.6}", self.final_theta),
            self.final_n_levels.to_string(),
            format!("{:.6}", self.optimum_theta),
            u8::from(self.converged).to_string(),
            opt(self.settled_at),
            opt(self.recover_iterations),
            sci(self.mean_time_last),
            self.nl_probes.to_string(),
            sci(self.probe_fraction),
        ]
    }
}

pub fn summarize(traj: &Trajectory, oracle: &WorkloadOracle, steps: u64, base_step: f64) -> LabSummary {
    let last = steps.saturating_sub(1);
    let opt = oracle.optimum(last).theta;
    let tol = 2.0 * base_step;
    let fixed_target = oracle.drift == 0.0;
    let settled_at = if fixed_target { traj.settled_at(0, opt, tol) } else { None };
    let recover_iterations = oracle
        .switch_at
        .filter(|_| fixed_target)
        .and_then(|s| traj.settled_at(s, opt, tol).map(|i| i - s));
    LabSummary {
        controller: traj.kind,
        final_theta: traj.final_params.theta,
        final_n_levels: traj.final_params.n_levels,
        optimum_theta: opt,
        converged: (traj.final_params.theta - opt).abs() <= tol + 1e-9,
        settled_at,
        recover_iterations,
        mean_time_last: traj.mean_time_last(100),
        nl_probes: traj.stats.nl_probes,
        probe_fraction: traj.probe_account().fraction(),
    }
}

pub fn run(args: &LabArgs, hash: &str) -> Result<String> {
    let c = &args.common;
    if !(args.noise >= 0.0 && args.noise < 1.0) {
        return Err(CliError::usage("--noise must lie in [0, 1)"));
    }
    let steps = c.steps.unwrap_or(DEFAULT_STEPS);
    let oracle = oracle(args.oracle, steps, args.noise);
    oracle.validate().map_err(|e| CliError::usage(e.to_string()))?;
    let kinds: Vec<TunerKind> = match c.tuner {
        Some(k) => vec![k],
        None => vec![TunerKind::At1, TunerKind::At2, TunerKind::At3a, TunerKind::At3b],
    };
    let start = Params::new(c.theta0.unwrap_or(default_start(args.oracle)), c.nlevels0.unwrap_or(NL_OPT - 1));
    let base_step = tuner_config(c).base_thetastep;

    let mut trace = CsvOut::create(&c.out, "lab_trace.csv", hash, &TraceRow::HEADER)?;
    let mut summ = CsvOut::create(&c.out, "lab_summary.csv", hash, &LabSummary::HEADER)?;
    let mut text = String::new();
    for kind in kinds {
        let mut tuner = new_tuner(kind, c, start)?;
        let traj = run_controller(&mut tuner, &oracle, steps, c.seed)?;
        for r in &traj.rows {
            trace.row(r.fields())?;
        }
        let s = summarize(&traj, &oracle, steps, base_step);
        summ.row(s.fields())?;
        writeln!(
            text,
            "{}: final theta {:.4} (optimum {:.4}), converged {}, settled at {}",
            kind.id(),
            s.final_theta,
            s.optimum_theta,
            s.converged,
            s.settled_at.map_or_else(|| "-".into(), |i| i.to_string())
        )
        .ok();
        if let Some(r) = s.recover_iterations {
            writeln!(text, "{}: recovered {r} iterations after the switch", kind.id()).ok();
        }
    }
    trace.finish()?;
    let path = summ.finish()?;
    writeln!(text, "wrote {}", path.display()).ok();
    Ok(text)
}
