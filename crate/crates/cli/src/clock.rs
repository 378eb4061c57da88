//! Iteration times: measured wall time, or a deterministic cost model over
//! the engine's operation counts.

use std::time::Duration;

use afmm::{PhaseTimings, WorkCounters};

use crate::args::Clock;

/// Seconds per unit of modeled work (one kernel evaluation).
pub const MODEL_UNIT: f64 = 1e-8;
/// Fixed modeled cost of a step, so an empty step still takes time.
pub const MODEL_OVERHEAD: f64 = 1e-6;

/// Phase times implied by `c` for a tree of `n_levels` levels.
///
/// Translations cost `p²` units, expansion formation and evaluation `p` per
/// point, and partitioning `n_levels` per point. In a hybrid run the near
/// field overlaps the downward pass.
pub fn model_timings(c: &WorkCounters, n_levels: usize, hybrid: bool) -> PhaseTimings {
    let p = c.p as f64;
    let u = MODEL_UNIT;
    let t_partition = c.p2m_points as f64 * n_levels as f64 * u;
    let t_p2m = c.p2m_points as f64 * p * u;
    let t_upward = c.m2m as f64 * p * p * u;
    let t_m2l = (c.m2l + c.l2l) as f64 * p * p * u;
    let t_p2p = c.p2p_pairs as f64 * u;
    let t_assembly = c.l2p_points as f64 * p * u;
    let t_q = MODEL_OVERHEAD + t_partition + t_p2m + t_upward + t_assembly;
    let (t_total, cpu_wait) = if hybrid {
        (t_q + t_m2l.max(t_p2p), (t_p2p - t_m2l).max(0.0))
    } else {
        (t_q + t_m2l + t_p2p, 0.0)
    };
    PhaseTimings {
        t_partition,
        t_p2m,
        t_upward,
        t_m2l,
        t_p2p,
        t_assembly,
        t_q,
        t_total,
        cpu_wait,
        hybrid,
    }
}

/// Timings to report and the time the controller sees for one step.
pub fn step_time(clock: Clock, measured: PhaseTimings, counters: &WorkCounters, n_levels: usize, wall: Duration) -> (PhaseTimings, f64) {
    match clock {
        Clock::Wall => (measured, wall.as_secs_f64().max(1e-9)),
        Clock::Model => {
            let t = model_timings(counters, n_levels, measured.hybrid);
            (t, t.t_total)
        }
    }
}
