//! Drives a controller against a [`WorkloadOracle`] and records the trace.

use afmm::rng::substream;

use crate::error::Result;
use crate::oracle::WorkloadOracle;
use crate::tuner::{Autotuner, Decision, Measurement, Params, Proposal, TunerKind, TunerStats};

/// One line of a controller trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: u64,
    pub controller: TunerKind,
    pub theta: f64,
    pub n_levels: usize,
    pub p: usize,
    /// Move proposed after this iteration.
    pub proposal: Proposal,
    pub accepted: bool,
    pub time: f64,
    pub cpu_wait: Option<f64>,
    /// Filtered time the controller compared.
    pub effective_time: f64,
}

impl TraceRow {
    pub const HEADER: [&'static str; 9] = [
        "iteration",
        "controller_id",
        "theta",
        "n_levels",
        "p",
        "proposed_move",
        "accepted",
        "time",
        "cpu_wait",
    ];

    pub fn from_decision(kind: TunerKind, d: &Decision, m: &Measurement, p: usize) -> Self {
        Self {
            iteration: d.iteration,
            controller: kind,
            theta: d.measured.theta,
            n_levels: d.measured.n_levels,
            p,
            proposal: d.proposal,
            accepted: d.accepted,
            time: m.time,
            cpu_wait: m.cpu_wait,
            effective_time: d.effective_time,
        }
    }

    pub fn fields(&self) -> [String; 9] {
        [
            self.iteration.to_string(),
            self.controller.id().to_string(),
            format!("{:.6}", self.theta),
            self.n_levels.to_string(),
            self.p.to_string(),
            self.proposal.to_string(),
            u8::from(self.accepted).to_string(),
            format!("{:.9e}", self.time),
            self.cpu_wait.map_or_else(String::new, |w| format!("{w:.9e}")),
        ]
    }

    pub fn params(&self) -> Params {
        Params {
            theta: self.theta,
            n_levels: self.n_levels,
        }
    }
}

/// Cost accounting of rejected `n_levels` probes, recomputed from a trace.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProbeAccount {
    pub probes: u64,
    pub rejected: u64,
    /// Sum over rejected probes of the filtered-time increase they caused.
    pub cost: f64,
    pub max_cost: f64,
    /// Sum of the runtimes of accepted iterations.
    pub basetime: f64,
}

impl ProbeAccount {
    pub fn from_rows(rows: &[TraceRow]) -> Self {
        let mut acc = ProbeAccount::default();
        for (k, row) in rows.iter().enumerate() {
            if row.accepted {
                acc.basetime += row.time;
            }
            let Some(prev) = k.checked_sub(1).map(|j| &rows[j]) else {
                continue;
            };
            if let Proposal::NLevels(_) = prev.proposal {
                acc.probes += 1;
                if !row.accepted {
                    let c = (row.effective_time - prev.effective_time).max(0.0);
                    acc.rejected += 1;
                    acc.cost += c;
                    acc.max_cost = acc.max_cost.max(c);
                }
            }
        }
        acc
    }

    pub fn fraction(&self) -> f64 {
        if self.basetime > 0.0 {
            self.cost / self.basetime
        } else {
            0.0
        }
    }

    /// Allowance for the one probe that may overshoot the budget.
    pub fn one_probe(&self) -> f64 {
        if self.basetime > 0.0 {
            self.max_cost / self.basetime
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kind: TunerKind,
    pub rows: Vec<TraceRow>,
    pub stats: TunerStats,
    pub final_params: Params,
}

impl Trajectory {
    pub fn total_time(&self) -> f64 {
        self.rows.iter().map(|r| r.time).sum()
    }

    /// Mean runtime over the last `n` iterations.
    pub fn mean_time_last(&self, n: usize) -> f64 {
        let tail = &self.rows[self.rows.len().saturating_sub(n)..];
        tail.iter().map(|r| r.time).sum::<f64>() / tail.len().max(1) as f64
    }

    pub fn probe_account(&self) -> ProbeAccount {
        ProbeAccount::from_rows(&self.rows)
    }

    /// First iteration at or after `from` whose θ is within `tol` of
    /// `target` and stays there until the end of the run. Rejected
    /// iterations are probes that were undone and do not count.
    pub fn settled_at(&self, from: u64, target: f64, tol: f64) -> Option<u64> {
        let mut since = None;
        for r in self.rows.iter().filter(|r| r.iteration >= from && r.accepted) {
            if (r.theta - target).abs() <= tol + 1e-9 {
                since.get_or_insert(r.iteration);
            } else {
                since = None;
            }
        }
        since
    }
}

fn p_for(theta: f64) -> usize {
    afmm::table_p_extended(1e-6, theta).unwrap_or(0)
}

/// Run `iterations` oracle iterations under `tuner`. The oracle's noise is
/// drawn from the `oracle-noise` substream of `seed`.
pub fn run_controller(
    tuner: &mut Autotuner,
    oracle: &WorkloadOracle,
    iterations: u64,
    seed: u64,
) -> Result<Trajectory> {
    oracle.validate()?;
    let mut noise = substream(seed, "oracle-noise");
    let mut rows = Vec::with_capacity(iterations as usize);
    for i in 0..iterations {
        let params = tuner.params();
        let m = Measurement {
            iteration: i,
            time: oracle.time(i, params, &mut noise),
            cpu_wait: oracle.cpu_wait(params),
        };
        let d = tuner.step(m)?;
        rows.push(TraceRow::from_decision(tuner.kind(), &d, &m, p_for(params.theta)));
    }
    Ok(Trajectory {
        kind: tuner.kind(),
        rows,
        stats: tuner.stats(),
        final_params: tuner.params(),
    })
}
