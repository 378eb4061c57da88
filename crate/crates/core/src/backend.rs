//! Near-field (P2P) execution backends.
//!
//! The engine hands a backend the tree-ordered points and the finest-level
//! strong lists; the backend returns the near-field potential of every
//! evaluation point, also in tree order. A concurrent backend is run on its
//! own thread while the downward pass proceeds on the engine's pool, which is
//! how an accelerator offload is modelled here.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::connectivity::LevelConnectivity;
use crate::error::{FmmError, Result};
use crate::kernel::{p2p_accumulate, Kernel, Smoother};
use crate::pyramid::MBox;
use crate::scalar::{Scalar, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capability {
    /// Runs on the calling thread, after the downward pass.
    Synchronous,
    /// May run alongside the downward pass.
    Concurrent,
}

/// Everything a backend needs for one near-field evaluation.
#[derive(Debug, Clone, Copy)]
pub struct NearFieldJob<'a, T> {
    pub kernel: Kernel,
    pub smoother: Option<Smoother<T>>,
    pub boxes: &'a [MBox<T>],
    pub links: &'a LevelConnectivity,
    pub source_pos: &'a [C<T>],
    pub source_m: &'a [C<T>],
    pub source_cores: Option<&'a [T]>,
    pub eval_pos: &'a [C<T>],
}

impl<T: Scalar> NearFieldJob<'_, T> {
    /// Near field of finest box `b` accumulated into `out` (its eval slice).
    /// Strong partners are visited in ascending order.
    pub fn box_into(&self, b: usize, out: &mut [C<T>]) {
        let target = &self.boxes[b];
        let ys = &self.eval_pos[target.eval_range.clone()];
        for &s in self.links.strong(b) {
            let r = self.boxes[s].point_range.clone();
            if r.is_empty() {
                continue;
            }
            p2p_accumulate(
                self.kernel,
                self.smoother.as_ref(),
                ys,
                &self.source_pos[r.clone()],
                &self.source_m[r.clone()],
                self.source_cores.map(|c| &c[r]),
                out,
            );
        }
    }

    /// The output split into one mutable slice per finest box.
    fn split<'o>(&self, out: &'o mut [C<T>]) -> Vec<(usize, &'o mut [C<T>])> {
        let mut rest = out;
        let mut parts = Vec::with_capacity(self.boxes.len());
        for (b, bx) in self.boxes.iter().enumerate() {
            let (head, tail) = std::mem::take(&mut rest).split_at_mut(bx.n_evals());
            rest = tail;
            if !head.is_empty() {
                parts.push((b, head));
            }
        }
        parts
    }

    fn zeros(&self) -> Vec<C<T>> {
        vec![C::new(T::zero(), T::zero()); self.eval_pos.len()]
    }

    pub fn run_serial(&self) -> Vec<C<T>> {
        let mut out = self.zeros();
        for (b, part) in self.split(&mut out) {
            self.box_into(b, part);
        }
        out
    }

    /// Box-parallel evaluation on the current rayon pool. Each box is computed
    /// exactly as in [`run_serial`](Self::run_serial), so results are bitwise
    /// identical.
    pub fn run_parallel(&self) -> Vec<C<T>> {
        let mut out = self.zeros();
        self.split(&mut out)
            .into_par_iter()
            .for_each(|(b, part)| self.box_into(b, part));
        out
    }
}

pub trait NearFieldBackend<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;
    fn capability(&self) -> Capability;
    fn evaluate(&self, job: &NearFieldJob<'_, T>) -> Result<Vec<C<T>>>;
}

/// Runs on the calling thread.
#[derive(Debug, Default, Clone, Copy)]
pub struct SerialBackend;

impl<T: Scalar> NearFieldBackend<T> for SerialBackend {
    fn name(&self) -> &str {
        "serial"
    }

    fn capability(&self) -> Capability {
        Capability::Synchronous
    }

    fn evaluate(&self, job: &NearFieldJob<'_, T>) -> Result<Vec<C<T>>> {
        Ok(job.run_serial())
    }
}

/// A dedicated thread pool, run concurrently with the downward pass.
pub struct PoolBackend {
    pool: ThreadPool,
}

impl PoolBackend {
    pub fn new(threads: usize) -> Result<Self> {
        if threads == 0 {
            return Err(FmmError::param("threads", "backend pool needs at least one thread"));
        }
        let pool = ThreadPoolBuilder::new()
            .num_threads(threads)
            .thread_name(|i| format!("afmm-p2p-{i}"))
            .build()
            .map_err(|e| FmmError::Backend {
                backend: "pool".into(),
                phase: "setup",
                message: e.to_string(),
            })?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl<T: Scalar> NearFieldBackend<T> for PoolBackend {
    fn name(&self) -> &str {
        "pool"
    }

    fn capability(&self) -> Capability {
        Capability::Concurrent
    }

    fn evaluate(&self, job: &NearFieldJob<'_, T>) -> Result<Vec<C<T>>> {
        Ok(self.pool.install(|| job.run_parallel()))
    }
}

/// Accelerator stand-in: a fixed launch latency, then the computation, then
/// an extra delay so the effective throughput is `1 / slowdown` of a single
/// core.
#[derive(Debug, Clone, Copy)]
pub struct ThrottledBackend {
    pub latency: Duration,
    pub slowdown: f64,
}

impl Default for ThrottledBackend {
    fn default() -> Self {
        Self {
            latency: Duration::from_millis(2),
            slowdown: 1.0,
        }
    }
}

impl ThrottledBackend {
    pub fn new(latency: Duration, slowdown: f64) -> Result<Self> {
        if !(slowdown >= 1.0 && slowdown.is_finite()) {
            return Err(FmmError::param("slowdown", format!("{slowdown} must be a finite factor >= 1")));
        }
        Ok(Self { latency, slowdown })
    }
}

impl<T: Scalar> NearFieldBackend<T> for ThrottledBackend {
    fn name(&self) -> &str {
        "throttled"
    }

    fn capability(&self) -> Capability {
        Capability::Concurrent
    }

    fn evaluate(&self, job: &NearFieldJob<'_, T>) -> Result<Vec<C<T>>> {
        std::thread::sleep(self.latency);
        let start = Instant::now();
        let out = job.run_serial();
        let extra = start.elapsed().mul_f64(self.slowdown - 1.0);
        if !extra.is_zero() {
            std::thread::sleep(extra);
        }
        Ok(out)
    }
}

/// Backend selector used by configurations and the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackendKind {
    Serial,
    Pool { threads: usize },
    Throttled { latency: Duration, slowdown: f64 },
}

impl BackendKind {
    pub fn name(&self) -> &'static str {
        match self {
            BackendKind::Serial => "serial",
            BackendKind::Pool { .. } => "pool",
            BackendKind::Throttled { .. } => "throttled",
        }
    }

    pub fn build<T: Scalar>(&self) -> Result<Box<dyn NearFieldBackend<T>>> {
        Ok(match *self {
            BackendKind::Serial => Box::new(SerialBackend),
            BackendKind::Pool { threads } => Box::new(PoolBackend::new(threads)?),
            BackendKind::Throttled { latency, slowdown } => Box::new(ThrottledBackend::new(latency, slowdown)?),
        })
    }
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    /// `serial`, `pool` (one thread) or `throttled` (default latency and no
    /// slowdown); the parameters can be set on the value afterwards.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "serial" => Ok(BackendKind::Serial),
            "pool" => Ok(BackendKind::Pool { threads: 1 }),
            "throttled" => {
                let d = ThrottledBackend::default();
                Ok(BackendKind::Throttled {
                    latency: d.latency,
                    slowdown: d.slowdown,
                })
            }
            other => Err(format!("unknown backend `{other}` (expected serial, pool or throttled)")),
        }
    }
}
