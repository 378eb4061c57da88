//! The controllers. Each call to [`Autotuner::step`] consumes the measurement
//! of iteration `i` and returns the parameters for iteration `i + 1`.
//!
//! All four controllers share the rejection rule: if the (noise filtered)
//! runtime got worse, the previous parameters are restored. They differ in
//! how moves are generated:
//!
//! * AT1 steps in a random direction with a fixed θ step.
//! * AT2 remembers the direction, reverses it on rejection and grows the θ
//!   step through repeated Fibonacci cycles.
//! * AT3a is AT2 for θ, but moves `n_levels` towards balancing the far field
//!   against the near-field backend, using the measured wait time.
//! * AT3b is AT2 for θ, and schedules `n_levels` probes so that the runtime
//!   spent on rejected probes stays within a fraction `cap` of the run.

use std::collections::VecDeque;
use std::fmt;

use rand::Rng;

use afmm::rng::Rng as StreamRng;

use crate::error::{Result, TuneError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TunerKind {
    None,
    At1,
    At2,
    At3a,
    At3b,
}

impl TunerKind {
    pub const ALL: [TunerKind; 5] = [TunerKind::None, TunerKind::At1, TunerKind::At2, TunerKind::At3a, TunerKind::At3b];

    pub fn id(self) -> &'static str {
        match self {
            TunerKind::None => "none",
            TunerKind::At1 => "at1",
            TunerKind::At2 => "at2",
            TunerKind::At3a => "at3a",
            TunerKind::At3b => "at3b",
        }
    }
}

impl fmt::Display for TunerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for TunerKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        TunerKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| format!("unknown tuner `{s}` (expected none, at1, at2, at3a or at3b)"))
    }
}

/// The two tuned parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub theta: f64,
    pub n_levels: usize,
}

impl Params {
    pub fn new(theta: f64, n_levels: usize) -> Self {
        Self {
            theta: round_theta(theta),
            n_levels,
        }
    }
}

/// θ values are kept on a 1e-6 grid so repeated steps compare exactly.
fn round_theta(theta: f64) -> f64 {
    (theta * 1e6).round() / 1e6
}

/// Outcome of one FMM iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub iteration: u64,
    /// Wall time of the iteration, seconds.
    pub time: f64,
    /// Time the far field waited on a concurrent near-field backend, or
    /// `None` when the near field ran synchronously.
    pub cpu_wait: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    None,
    Theta,
    NLevels,
}

/// What the controller asked for after an iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Proposal {
    Stay,
    Theta(f64),
    NLevels(i32),
    /// The last move made things worse and was undone.
    Revert,
}

impl fmt::Display for Proposal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Proposal::Stay => f.write_str("none"),
            Proposal::Theta(d) => write!(f, "theta{d:+.6}"),
            Proposal::NLevels(d) => write!(f, "nlevels{d:+}"),
            Proposal::Revert => f.write_str("revert"),
        }
    }
}

/// Controller settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TunerConfig {
    pub theta_min: f64,
    pub theta_max: f64,
    pub n_levels_min: usize,
    pub n_levels_max: usize,
    pub base_thetastep: f64,
    /// θ moves on iterations divisible by this.
    pub theta_every: u64,
    /// `n_levels` moves on iterations divisible by this; takes precedence
    /// over a θ move on the same iteration.
    pub nlevels_every: u64,
    /// Noise filter window: the minimum over up to this many runs at the
    /// current parameters, taken from the last `2 * window` iterations.
    pub window: usize,
    /// AT3b budget for rejected `n_levels` probes, as a fraction of the
    /// accepted runtime.
    pub cap: f64,
    /// Initial Fibonacci cycle length.
    pub fiblength: usize,
}

impl Default for TunerConfig {
    fn default() -> Self {
        Self {
            theta_min: 0.25,
            theta_max: 0.8,
            n_levels_min: 1,
            n_levels_max: 12,
            base_thetastep: 0.01,
            theta_every: 2,
            nlevels_every: 10,
            window: 3,
            cap: 0.1,
            fiblength: 3,
        }
    }
}

impl TunerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(TuneError::InvalidParameter { name, reason: reason.into() });
        if !(self.theta_min > 0.0 && self.theta_min < self.theta_max && self.theta_max < 1.0) {
            return bad("theta bounds", "need 0 < theta_min < theta_max < 1");
        }
        if self.n_levels_min < 1 || self.n_levels_min > self.n_levels_max {
            return bad("n_levels bounds", "need 1 <= n_levels_min <= n_levels_max");
        }
        if !(self.base_thetastep > 0.0) {
            return bad("thetastep", "must be positive");
        }
        if self.theta_every == 0 || self.nlevels_every == 0 {
            return bad("cadence", "move intervals must be at least 1");
        }
        if self.window == 0 {
            return bad("window", "must be at least 1");
        }
        if !(self.cap >= 0.0) || !self.cap.is_finite() {
            return bad("cap", "must be a finite value >= 0");
        }
        if self.fiblength < 2 {
            return bad("fiblength", "must be at least 2");
        }
        Ok(())
    }

    fn theta_ok(&self, t: f64) -> bool {
        t >= self.theta_min - 1e-12 && t <= self.theta_max + 1e-12
    }

    fn nl_ok(&self, n: i64) -> bool {
        n >= self.n_levels_min as i64 && n <= self.n_levels_max as i64
    }
}

/// `fib(1) = fib(2) = 1`.
pub fn fib(n: usize) -> u64 {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 0..n {
        (a, b) = (b, a.saturating_add(b));
    }
    a
}

/// Minimum of the most recent `window` times (all of them if fewer).
pub fn filter_noise(history: &[f64], window: usize) -> Result<f64> {
    if window == 0 {
        return Err(TuneError::InvalidParameter {
            name: "window",
            reason: "must be at least 1".into(),
        });
    }
    let start = history.len().saturating_sub(window);
    history[start..]
        .iter()
        .copied()
        .reduce(f64::min)
        .ok_or(TuneError::NoMeasurement)
}

/// Controller memory.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningState {
    pub params: Params,
    pub thetastep: f64,
    pub thetadir: i32,
    pub nldir: i32,
    pub fibcount: usize,
    pub fiblength: usize,
    pub upcost: f64,
    pub downcost: f64,
    /// Sum of the runtimes of accepted iterations.
    pub basetime: f64,
    /// First iteration at which an up (down) probe may be made again.
    pub next_up: f64,
    pub next_down: f64,
    pub last_move: MoveKind,
    last_nl_dir: i32,
    /// Parameters of the previous iteration.
    pub last_params: Params,
    /// Effective (filtered) time of the previous iteration.
    pub prev_time: Option<f64>,
    history: VecDeque<(Params, f64)>,
}

impl TuningState {
    fn new(initial: Params, cfg: &TunerConfig) -> Self {
        Self {
            params: initial,
            thetastep: cfg.base_thetastep,
            thetadir: 1,
            nldir: 1,
            fibcount: 1,
            fiblength: cfg.fiblength,
            upcost: 0.0,
            downcost: 0.0,
            basetime: 0.0,
            next_up: 0.0,
            next_down: 0.0,
            last_move: MoveKind::None,
            last_nl_dir: 0,
            last_params: initial,
            prev_time: None,
            history: VecDeque::new(),
        }
    }

    /// Runtimes recorded at `params` within the last `horizon` iterations,
    /// oldest first.
    pub fn times_at(&self, params: Params, horizon: usize) -> Vec<f64> {
        let skip = self.history.len().saturating_sub(horizon);
        self.history.iter().skip(skip).filter(|(p, _)| *p == params).map(|(_, t)| *t).collect()
    }
}

/// Result of one controller step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub iteration: u64,
    /// Parameters the measured iteration ran with.
    pub measured: Params,
    /// Parameters for the next iteration.
    pub next: Params,
    pub proposal: Proposal,
    /// False when the measured iteration was rejected.
    pub accepted: bool,
    pub effective_time: f64,
    /// Cost charged for a rejected `n_levels` probe.
    pub probe_cost: Option<f64>,
}

/// Running totals for reporting.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TunerStats {
    pub nl_probes: u64,
    pub nl_rejections: u64,
    pub theta_moves: u64,
    pub theta_rejections: u64,
    pub probe_cost: f64,
}

const HISTORY_CAP: usize = 256;

#[derive(Debug, Clone)]
pub struct Autotuner {
    kind: TunerKind,
    cfg: TunerConfig,
    state: TuningState,
    rng: StreamRng,
    stats: TunerStats,
}

impl Autotuner {
    pub fn new(kind: TunerKind, cfg: TunerConfig, initial: Params, rng: StreamRng) -> Result<Self> {
        cfg.validate()?;
        if !cfg.theta_ok(initial.theta) || !cfg.nl_ok(initial.n_levels as i64) {
            return Err(TuneError::InvalidParameter {
                name: "initial parameters",
                reason: format!("θ = {}, n_levels = {} outside the configured bounds", initial.theta, initial.n_levels),
            });
        }
        let initial = Params::new(initial.theta, initial.n_levels);
        Ok(Self {
            kind,
            state: TuningState::new(initial, &cfg),
            cfg,
            rng,
            stats: TunerStats::default(),
        })
    }

    pub fn kind(&self) -> TunerKind {
        self.kind
    }

    pub fn config(&self) -> &TunerConfig {
        &self.cfg
    }

    pub fn state(&self) -> &TuningState {
        &self.state
    }

    pub fn stats(&self) -> TunerStats {
        self.stats
    }

    /// Parameters for the next iteration.
    pub fn params(&self) -> Params {
        self.state.params
    }

    pub fn step(&mut self, m: Measurement) -> Result<Decision> {
        if !(m.time > 0.0 && m.time.is_finite()) {
            return Err(TuneError::InvalidParameter {
                name: "time",
                reason: format!("measured time {} must be positive", m.time),
            });
        }
        let i = m.iteration;
        let cur = self.state.params;
        let st = &mut self.state;
        st.history.push_back((cur, m.time));
        if st.history.len() > HISTORY_CAP {
            st.history.pop_front();
        }
        let effective = filter_noise(&st.times_at(cur, 2 * self.cfg.window), self.cfg.window)?;
        let mut decision = Decision {
            iteration: i,
            measured: cur,
            next: cur,
            proposal: Proposal::Stay,
            accepted: true,
            effective_time: effective,
            probe_cost: None,
        };
        if self.kind == TunerKind::None {
            st.prev_time = Some(effective);
            st.basetime += m.time;
            return Ok(decision);
        }

        if let Some(prev) = st.prev_time {
            if effective > prev {
                decision.probe_cost = self.reject(i, effective - prev, m.cpu_wait);
                let st = &mut self.state;
                st.prev_time = Some(effective);
                st.params = st.last_params;
                st.last_params = cur;
                st.last_move = MoveKind::None;
                decision.accepted = false;
                decision.next = st.params;
                decision.proposal = Proposal::Revert;
                return Ok(decision);
            }
        }

        let st = &mut self.state;
        st.prev_time = Some(effective);
        st.basetime += m.time;
        st.last_params = cur;
        st.last_move = MoveKind::None;

        let nl_turn = i % self.cfg.nlevels_every == 0;
        let theta_turn = i % self.cfg.theta_every == 0;
        let mut proposal = Proposal::Stay;
        if nl_turn {
            proposal = self.nl_move(i, m.cpu_wait);
        }
        // AT3b may decline an n_levels turn; θ then gets the iteration.
        if proposal == Proposal::Stay && theta_turn && !(nl_turn && self.kind != TunerKind::At3b) {
            proposal = self.theta_move();
        }
        decision.proposal = proposal;
        decision.next = self.state.params;
        Ok(decision)
    }

    /// Bookkeeping for a rejected iteration. Returns the charged probe cost.
    fn reject(&mut self, i: u64, cost: f64, cpu_wait: Option<f64>) -> Option<f64> {
        let kind = self.kind;
        let st = &mut self.state;
        match st.last_move {
            MoveKind::Theta => {
                self.stats.theta_rejections += 1;
                if kind != TunerKind::At1 {
                    Self::advance_step(st, self.cfg.base_thetastep);
                }
                None
            }
            MoveKind::NLevels => {
                self.stats.nl_rejections += 1;
                match kind {
                    TunerKind::At2 => st.nldir = -st.nldir,
                    TunerKind::At3a if cpu_wait.is_none() => st.nldir = -st.nldir,
                    TunerKind::At3b => {
                        let dir = st.last_nl_dir;
                        let cap = self.cfg.cap;
                        let acc = if dir > 0 { &mut st.upcost } else { &mut st.downcost };
                        *acc += cost;
                        let wait_time = (*acc + cost) / cap - st.basetime;
                        let interval = if st.basetime > 0.0 {
                            wait_time * i as f64 / st.basetime
                        } else {
                            f64::INFINITY
                        };
                        let next = i as f64 + interval.max(0.0).ceil();
                        if dir > 0 {
                            st.next_up = next;
                        } else {
                            st.next_down = next;
                        }
                        st.nldir = -dir;
                    }
                    _ => {}
                }
                self.stats.probe_cost += cost;
                Some(cost)
            }
            MoveKind::None => None,
        }
    }

    /// Next θ step of the Fibonacci cycle, in the opposite direction.
    fn advance_step(st: &mut TuningState, base: f64) {
        if st.fibcount < st.fiblength {
            st.fibcount += 1;
        } else {
            st.fibcount = 1;
            st.fiblength += 1;
        }
        st.thetastep = fib(st.fibcount) as f64 * base;
        st.thetadir = -st.thetadir;
    }

    fn theta_move(&mut self) -> Proposal {
        let st = &mut self.state;
        let delta = match self.kind {
            TunerKind::At1 => {
                let bit: bool = self.rng.gen();
                if bit {
                    self.cfg.base_thetastep
                } else {
                    -self.cfg.base_thetastep
                }
            }
            _ => st.thetastep * st.thetadir as f64,
        };
        let next = round_theta(st.params.theta + delta);
        if !self.cfg.theta_ok(next) {
            // Rejected by the bounds: handled like a rejected move, so a
            // grown step cannot stay stuck outside the range.
            if self.kind != TunerKind::At1 {
                Self::advance_step(st, self.cfg.base_thetastep);
            }
            return Proposal::Stay;
        }
        st.params.theta = next;
        st.last_move = MoveKind::Theta;
        self.stats.theta_moves += 1;
        Proposal::Theta(delta)
    }

    fn apply_nl(&mut self, dir: i32) -> Proposal {
        let st = &mut self.state;
        st.params.n_levels = (st.params.n_levels as i64 + dir as i64) as usize;
        st.last_move = MoveKind::NLevels;
        st.last_nl_dir = dir;
        self.stats.nl_probes += 1;
        Proposal::NLevels(dir)
    }

    fn nl_move(&mut self, i: u64, cpu_wait: Option<f64>) -> Proposal {
        let nl = self.state.params.n_levels as i64;
        match self.kind {
            TunerKind::None => Proposal::Stay,
            TunerKind::At1 => {
                let dir = if self.rng.gen::<bool>() { 1 } else { -1 };
                if self.cfg.nl_ok(nl + dir as i64) {
                    self.apply_nl(dir)
                } else {
                    Proposal::Stay
                }
            }
            TunerKind::At2 | TunerKind::At3a => {
                let dir = match (self.kind, cpu_wait) {
                    (TunerKind::At3a, Some(w)) => {
                        if w > 0.0 {
                            1
                        } else {
                            -1
                        }
                    }
                    _ => self.state.nldir,
                };
                if self.cfg.nl_ok(nl + dir as i64) {
                    self.apply_nl(dir)
                } else {
                    if !(self.kind == TunerKind::At3a && cpu_wait.is_some()) {
                        self.state.nldir = -dir;
                    }
                    Proposal::Stay
                }
            }
            TunerKind::At3b => {
                let st = &self.state;
                let cap = self.cfg.cap;
                if cap <= 0.0 || st.upcost + st.downcost > cap * st.basetime {
                    return Proposal::Stay;
                }
                for dir in [st.nldir, -st.nldir] {
                    let due = if dir > 0 { st.next_up } else { st.next_down };
                    if (i as f64) >= due && self.cfg.nl_ok(nl + dir as i64) {
                        self.state.nldir = dir;
                        return self.apply_nl(dir);
                    }
                }
                Proposal::Stay
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use afmm::rng::substream;

    fn tuner(kind: TunerKind, cfg: TunerConfig) -> Autotuner {
        Autotuner::new(kind, cfg, Params::new(0.5, 4), substream(1, "test")).unwrap()
    }

    fn meas(i: u64, time: f64) -> Measurement {
        Measurement {
            iteration: i,
            time,
            cpu_wait: None,
        }
    }

    fn window1() -> TunerConfig {
        TunerConfig {
            window: 1,
            ..Default::default()
        }
    }

    #[test]
    fn fibonacci_numbers() {
        let v: Vec<u64> = (1..=8).map(fib).collect();
        assert_eq!(v, [1, 1, 2, 3, 5, 8, 13, 21]);
    }

    #[test]
    fn filter_examples() {
        assert_eq!(filter_noise(&[1.2, 1.0, 1.3], 1).unwrap(), 1.3);
        assert_eq!(filter_noise(&[1.2, 1.0, 1.3], 3).unwrap(), 1.0);
        assert_eq!(filter_noise(&[1.2, 1.0], 10).unwrap(), 1.0);
        assert!(matches!(filter_noise(&[], 3), Err(TuneError::NoMeasurement)));
        assert!(filter_noise(&[1.0], 0).is_err());
    }

    #[test]
    fn at1_rejects_worse_iteration() {
        let mut t = tuner(TunerKind::At1, window1());
        // iteration 0 is an n_levels turn
        let d0 = t.step(meas(0, 1.5)).unwrap();
        assert!(matches!(d0.proposal, Proposal::NLevels(_)));
        let d1 = t.step(meas(1, 2.0)).unwrap();
        assert!(!d1.accepted);
        assert_eq!(d1.next, Params::new(0.5, 4));
    }

    #[test]
    fn at1_theta_turn_and_idle_iteration() {
        let mut t = tuner(TunerKind::At1, window1());
        t.step(meas(1, 1.0)).unwrap();
        let idle = t.step(meas(3, 1.0)).unwrap();
        assert_eq!(idle.proposal, Proposal::Stay);
        assert_eq!(idle.next, idle.measured);
        let d = t.step(meas(4, 1.0)).unwrap();
        match d.proposal {
            Proposal::Theta(delta) => {
                assert!((delta.abs() - 0.01).abs() < 1e-12);
                assert!((d.next.theta - 0.5 - delta).abs() < 1e-9);
            }
            other => panic!("expected a θ move, got {other:?}"),
        }
    }

    #[test]
    fn at2_rejected_theta_grows_step_and_reverses() {
        let mut t = tuner(TunerKind::At2, window1());
        t.step(meas(1, 1.0)).unwrap();
        let d = t.step(meas(2, 1.0)).unwrap();
        assert_eq!(d.proposal, Proposal::Theta(0.01));
        assert_eq!(t.state().fibcount, 1);
        let r = t.step(meas(3, 1.1)).unwrap();
        assert!(!r.accepted);
        let s = t.state();
        assert_eq!(s.fibcount, 2);
        assert!((s.thetastep - 0.01).abs() < 1e-15);
        assert_eq!(s.thetadir, -1);
        assert_eq!(r.next.theta, 0.5);
    }

    #[test]
    fn at2_accepted_move_keeps_direction() {
        let mut t = tuner(TunerKind::At2, window1());
        t.step(meas(1, 1.0)).unwrap();
        t.step(meas(2, 1.0)).unwrap();
        t.step(meas(3, 0.9)).unwrap();
        let d = t.step(meas(4, 0.9)).unwrap();
        assert_eq!(d.proposal, Proposal::Theta(0.01));
        assert!((d.next.theta - 0.52).abs() < 1e-9);
    }

    #[test]
    fn fibonacci_cycle_resets_and_grows() {
        let mut t = tuner(TunerKind::At2, window1());
        t.state.fibcount = 3;
        t.step(meas(1, 1.0)).unwrap();
        t.step(meas(2, 1.0)).unwrap();
        t.step(meas(3, 2.0)).unwrap();
        assert_eq!(t.state().fibcount, 1);
        assert_eq!(t.state().fiblength, 4);
        assert!((t.state().thetastep - 0.01).abs() < 1e-15);
    }

    #[test]
    fn at3a_follows_wait_signal() {
        let mut t = tuner(TunerKind::At3a, window1());
        let d = t
            .step(Measurement {
                iteration: 10,
                time: 1.0,
                cpu_wait: Some(0.1),
            })
            .unwrap();
        assert_eq!(d.next.n_levels, 5);
        let mut t = tuner(TunerKind::At3a, window1());
        let d = t
            .step(Measurement {
                iteration: 10,
                time: 1.0,
                cpu_wait: Some(0.0),
            })
            .unwrap();
        assert_eq!(d.next.n_levels, 3);
    }

    #[test]
    fn at3b_interval_update() {
        let cfg = TunerConfig {
            window: 1,
            cap: 0.1,
            ..Default::default()
        };
        for (basetime, expect_next) in [(10.0, 20.0), (5.0, 40.0)] {
            let mut t = tuner(TunerKind::At3b, cfg.clone());
            t.state.prev_time = Some(1.0);
            t.state.last_move = MoveKind::NLevels;
            t.state.last_nl_dir = 1;
            t.state.basetime = basetime;
            t.step(meas(20, 1.5)).unwrap();
            let s = t.state();
            assert!((s.upcost - 0.5).abs() < 1e-15);
            assert_eq!(s.next_up, expect_next);
            assert_eq!(s.nldir, -1);
        }
    }

    #[test]
    fn at3b_zero_cap_never_probes() {
        let cfg = TunerConfig {
            cap: 0.0,
            ..Default::default()
        };
        let mut t = tuner(TunerKind::At3b, cfg);
        for i in 0..200 {
            let d = t.step(meas(i, 1.0)).unwrap();
            assert!(!matches!(d.proposal, Proposal::NLevels(_)));
        }
        assert_eq!(t.stats().nl_probes, 0);
        assert!(t.stats().theta_moves > 0);
    }

    #[test]
    fn bounds_respected() {
        let cfg = TunerConfig {
            window: 1,
            n_levels_max: 4,
            theta_max: 0.5,
            ..Default::default()
        };
        let mut t = tuner(TunerKind::At2, cfg);
        let d = t.step(meas(10, 1.0)).unwrap();
        assert_eq!(d.proposal, Proposal::Stay);
        assert_eq!(t.state().nldir, -1);
        let d = t.step(meas(12, 1.0)).unwrap();
        assert_eq!(d.proposal, Proposal::Stay);
        assert_eq!(t.state().thetadir, -1);
    }

    #[test]
    fn invalid_settings() {
        let cfg = TunerConfig {
            cap: -0.1,
            ..Default::default()
        };
        assert!(Autotuner::new(TunerKind::At3b, cfg, Params::new(0.5, 3), substream(0, "x")).is_err());
        assert!(Autotuner::new(TunerKind::At2, TunerConfig::default(), Params::new(0.9, 3), substream(0, "x")).is_err());
        let mut t = tuner(TunerKind::At2, TunerConfig::default());
        assert!(t.step(meas(0, 0.0)).is_err());
    }

    #[test]
    fn none_never_moves() {
        let mut t = tuner(TunerKind::None, TunerConfig::default());
        for i in 0..50 {
            let d = t.step(meas(i, 1.0 + (i % 7) as f64)).unwrap();
            assert_eq!(d.next, Params::new(0.5, 4));
        }
    }

    #[test]
    fn parse_kinds() {
        for k in TunerKind::ALL {
            assert_eq!(k.id().parse::<TunerKind>().unwrap(), k);
        }
        assert!("at4".parse::<TunerKind>().is_err());
    }
}
