//! `capsweep`: repeat a tuned run for each cap value and aggregate.

use std::fmt::Write as _;

use afmm_autotune::{run_controller, Params, ProbeAccount, TunerKind, WorkloadOracle};

use crate::args::{auto_levels, CapsweepArgs, Common, SimKind};
use crate::driver::{default_n, new_tuner, run_simulation, RunSpec};
use crate::error::{CliError, Result};
use crate::output::{sci, CsvOut};

pub const DEFAULT_SIM_STEPS: u64 = 100;
pub const DEFAULT_ORACLE_STEPS: u64 = 400;
/// Relative noise of the synthetic landscape.
const ORACLE_NOISE: f64 = 0.02;

/// Synthetic landscape used by `--sim oracle`: one valley at θ = 0.5 with
/// the best tree depth at 4.
pub fn cap_oracle() -> WorkloadOracle {
    WorkloadOracle::single_basin(0.5, 4).with_noise(ORACLE_NOISE)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapRow {
    pub cap: f64,
    pub repeats: usize,
    pub mean_runtime: f64,
    pub std_runtime: f64,
    pub mean_probes: f64,
    /// Largest probe-cost fraction over the repeats.
    pub max_fraction: f64,
    /// One-probe allowance of the repeat with the largest fraction.
    pub allowance: f64,
    /// Every repeat kept its probe cost within cap plus allowance.
    pub within_cap: bool,
    pub total_probes: u64,
}

impl CapRow {
    pub const HEADER: [&'static str; 9] = [
        "cap",
        "repeats",
        "mean_runtime",
        "std_runtime",
        "mean_probes",
        "max_probe_fraction",
        "allowance",
        "within_cap",
        "total_probes",
    ];

    pub fn fields(&self) -> [String; 9] {
        [
            format!("{}", self.cap),
            self.repeats.to_string(),
            sci(self.mean_runtime),
            sci(self.std_runtime),
            format!("{:.3}", self.mean_probes),
            sci(self.max_fraction),
            sci(self.allowance),
            u8::from(self.within_cap).to_string(),
            self.total_probes.to_string(),
        ]
    }

    fn aggregate(cap: f64, runs: &[(f64, ProbeAccount)]) -> Self {
        let r = runs.len() as f64;
        let mean = runs.iter().map(|(t, _)| t).sum::<f64>() / r;
        // Sample standard deviation; zero for a single repeat.
        let var = if runs.len() > 1 {
            runs.iter().map(|(t, _)| (t - mean).powi(2)).sum::<f64>() / (r - 1.0)
        } else {
            0.0
        };
        let worst = runs
            .iter()
            .map(|(_, a)| a)
            .max_by(|a, b| a.fraction().total_cmp(&b.fraction()))
            .copied()
            .unwrap_or_default();
        let total_probes: u64 = runs.iter().map(|(_, a)| a.probes).sum();
        Self {
            cap,
            repeats: runs.len(),
            mean_runtime: mean,
            std_runtime: var.sqrt(),
            mean_probes: total_probes as f64 / r,
            max_fraction: worst.fraction(),
            allowance: worst.one_probe(),
            within_cap: runs.iter().all(|(_, a)| a.fraction() <= cap + a.one_probe() + 1e-12),
            total_probes,
        }
    }
}

fn with_cap(c: &Common, cap: f64, seed: u64) -> Common {
    Common {
        cap,
        seed,
        ..c.clone()
    }
}

/// Run every cap `repeats` times; repeat `r` uses seed `seed + r`.
pub fn cap_rows(args: &CapsweepArgs) -> Result<Vec<CapRow>> {
    let c = &args.common;
    let caps = args.cap_list()?;
    if args.repeats == 0 {
        return Err(CliError::usage("--repeats must be at least 1"));
    }
    let kind = c.tuner.unwrap_or(TunerKind::At3b);
    let mut rows = Vec::with_capacity(caps.len());
    for &cap in &caps {
        let mut runs = Vec::with_capacity(args.repeats);
        for r in 0..args.repeats {
            let rc = with_cap(c, cap, c.seed.wrapping_add(r as u64));
            let (time, trace) = if args.setup.sim == SimKind::Oracle {
                let start = Params::new(c.theta0(), c.nlevels0.unwrap_or(4));
                let mut tuner = new_tuner(kind, &rc, start)?;
                let traj = run_controller(&mut tuner, &cap_oracle(), c.steps.unwrap_or(DEFAULT_ORACLE_STEPS), rc.seed)?;
                (traj.total_time(), traj.rows)
            } else {
                let n = c.n.unwrap_or_else(|| default_n(args.setup.sim));
                let run = run_simulation(
                    &RunSpec {
                        common: &rc,
                        setup: &args.setup,
                        n,
                        steps: c.steps.unwrap_or(DEFAULT_SIM_STEPS),
                        kind,
                        start: Params::new(c.theta0(), c.nlevels0.unwrap_or_else(|| auto_levels(n))),
                        snapshot_every: 0,
                    },
                    None,
                )?;
                (run.total_time, run.trace)
            };
            runs.push((time, ProbeAccount::from_rows(&trace)));
        }
        rows.push(CapRow::aggregate(cap, &runs));
    }
    Ok(rows)
}

pub fn run(args: &CapsweepArgs, hash: &str) -> Result<String> {
    let rows = cap_rows(args)?;
    let mut out = CsvOut::create(&args.common.out, "capsweep.csv", hash, &CapRow::HEADER)?;
    let mut summary = String::new();
    for r in &rows {
        out.row(r.fields())?;
        writeln!(
            summary,
            "cap {}: runtime {:.4e} ± {:.2e} s, probes {:.1}, probe fraction {:.4}",
            r.cap, r.mean_runtime, r.std_runtime, r.mean_probes, r.max_fraction
        )
        .ok();
    }
    let path = out.finish()?;
    writeln!(summary, "wrote {}", path.display()).ok();
    Ok(summary)
}
