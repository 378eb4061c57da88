//! `simulate`: a simulation under a controller, optionally paired with an
//! untuned run from the same initial state. The paired run's timings go to
//! `timing_none.csv`; its trace rows join `trace.csv` under controller `none`.

use std::fmt::Write as _;

use afmm_autotune::{Params, TraceRow, TunerKind};

use crate::args::{auto_levels, SimKind, SimulateArgs};
use crate::driver::{default_n, run_simulation, snapshot_header, RunSpec, SimRun, TimingRow};
use crate::error::{CliError, Result};
use crate::output::CsvOut;

pub const DEFAULT_STEPS: u64 = 100;

pub fn write_timing(out: &mut CsvOut, run: &SimRun) -> Result<()> {
    for r in &run.timing {
        out.row(r.fields())?;
    }
    Ok(())
}

pub fn write_trace(out: &mut CsvOut, run: &SimRun) -> Result<()> {
    for r in &run.trace {
        out.row(r.fields())?;
    }
    Ok(())
}

pub fn run(args: &SimulateArgs, hash: &str) -> Result<String> {
    let c = &args.common;
    if args.setup.sim == SimKind::Oracle {
        return Err(CliError::usage("simulate needs --sim vortex, galaxy or cylinder"));
    }
    let n = c.n.unwrap_or_else(|| default_n(args.setup.sim));
    let kind = c.tuner.unwrap_or(TunerKind::None);
    let start = Params::new(c.theta0(), c.nlevels0.unwrap_or_else(|| auto_levels(n)));
    let spec = RunSpec {
        common: c,
        setup: &args.setup,
        n,
        steps: c.steps.unwrap_or(DEFAULT_STEPS),
        kind,
        start,
        snapshot_every: args.snapshot_every,
    };

    let mut snaps = CsvOut::create(&c.out, "snapshots.csv", hash, snapshot_header())?;
    let tuned = run_simulation(&spec, Some(&mut snaps))?;
    snaps.finish()?;

    let mut timing = CsvOut::create(&c.out, "timing.csv", hash, &TimingRow::HEADER)?;
    let mut trace = CsvOut::create(&c.out, "trace.csv", hash, &TraceRow::HEADER)?;
    write_timing(&mut timing, &tuned)?;
    write_trace(&mut trace, &tuned)?;

    let mut summary = String::new();
    let fp = tuned.final_params;
    writeln!(
        summary,
        "final theta = {:.4}, n_levels = {}",
        fp.theta, fp.n_levels
    )
    .ok();
    if args.paired && kind != TunerKind::None {
        let base = run_simulation(
            &RunSpec {
                kind: TunerKind::None,
                ..spec
            },
            None,
        )?;
        let mut base_timing = CsvOut::create(&c.out, "timing_none.csv", hash, &TimingRow::HEADER)?;
        write_timing(&mut base_timing, &base)?;
        base_timing.finish()?;
        write_trace(&mut trace, &base)?;
        let speedup = if tuned.total_time > 0.0 { base.total_time / tuned.total_time } else { 1.0 };
        writeln!(
            summary,
            "total runtime {}: {:.6e} s, none: {:.6e} s, speedup {speedup:.4}",
            kind.id(),
            tuned.total_time,
            base.total_time
        )
        .ok();
    } else {
        writeln!(summary, "total runtime {}: {:.6e} s", kind.id(), tuned.total_time).ok();
    }
    timing.finish()?;
    trace.finish()?;
    Ok(summary)
}
