//! Full FMM evaluation: partition, upward pass, concurrent downward pass and
//! near field, assembly.

use std::time::Instant;

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::backend::{BackendKind, Capability, NearFieldBackend, NearFieldJob};
use crate::connectivity::{Connectivity, Separation};
use crate::error::{FmmError, Result};
use crate::expansions::{Operators, PRule};
use crate::kernel::{Kernel, Smoother};
use crate::points::{EvalSet, SourceSet};
use crate::pyramid::{MBox, Pyramid};
use crate::scalar::{Scalar, C};

/// Parameters of one FMM evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FmmConfig {
    pub theta: f64,
    pub n_levels: usize,
    pub tol: f64,
    pub kernel: Kernel,
    pub p_rule: PRule,
    pub backend: BackendKind,
    pub worker_threads: usize,
    /// Level below which the downward pass fans out into one task per box.
    /// Clamped to `n_levels - 1`, so it stays valid while `n_levels` is tuned.
    pub task_split_level: usize,
    pub smoother: Option<Smoother<f64>>,
}

impl Default for FmmConfig {
    fn default() -> Self {
        Self {
            theta: 0.5,
            n_levels: 4,
            tol: 1e-6,
            kernel: Kernel::Harmonic,
            p_rule: PRule::Table,
            backend: BackendKind::Serial,
            worker_threads: 1,
            task_split_level: 2,
            smoother: None,
        }
    }
}

impl FmmConfig {
    pub fn validate(&self) -> Result<()> {
        crate::connectivity::check_theta(self.theta)?;
        if self.n_levels < 1 || self.n_levels > 16 {
            return Err(FmmError::param("n_levels", format!("{} is outside [1, 16]", self.n_levels)));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(FmmError::param("tol", format!("{} is outside (0, 1)", self.tol)));
        }
        if self.worker_threads == 0 {
            return Err(FmmError::param("worker_threads", "must be at least 1"));
        }
        if let Some(s) = &self.smoother {
            s.validate()?;
        }
        self.p().map(|_| ())
    }

    /// Expansion order for the current `(tol, θ)`.
    pub fn p(&self) -> Result<usize> {
        self.p_rule.resolve(self.tol, self.theta)
    }

    pub fn effective_split_level(&self) -> usize {
        self.task_split_level.min(self.n_levels - 1)
    }
}

/// Wall-clock breakdown of one evaluation, in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub t_partition: f64,
    pub t_p2m: f64,
    pub t_upward: f64,
    /// M2L and L2L over all levels.
    pub t_m2l: f64,
    /// Near field, as seen by the backend.
    pub t_p2p: f64,
    pub t_assembly: f64,
    /// Everything except the downward pass and the near field.
    pub t_q: f64,
    pub t_total: f64,
    /// Time the far-field side spent waiting for the near field to finish.
    pub cpu_wait: f64,
    /// True when the near field ran concurrently with the downward pass.
    pub hybrid: bool,
}

impl PhaseTimings {
    /// The wait signal, or `None` for a synchronous near field.
    pub fn cpu_wait_signal(&self) -> Option<f64> {
        self.hybrid.then_some(self.cpu_wait)
    }
}

/// Sums phase by phase, for steps that evaluate more than once.
impl std::ops::AddAssign for PhaseTimings {
    fn add_assign(&mut self, o: Self) {
        self.t_partition += o.t_partition;
        self.t_p2m += o.t_p2m;
        self.t_upward += o.t_upward;
        self.t_m2l += o.t_m2l;
        self.t_p2p += o.t_p2p;
        self.t_assembly += o.t_assembly;
        self.t_q += o.t_q;
        self.t_total += o.t_total;
        self.cpu_wait += o.cpu_wait;
        self.hybrid |= o.hybrid;
    }
}

/// Operation counts of one evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkCounters {
    pub p: usize,
    /// Kernel evaluations in the near field (self pairs included).
    pub p2p_pairs: u64,
    pub m2l: u64,
    pub m2m: u64,
    pub l2l: u64,
    pub p2m_points: u64,
    pub l2p_points: u64,
}

/// Sums the counts; `p` keeps the larger order.
impl std::ops::AddAssign for WorkCounters {
    fn add_assign(&mut self, o: Self) {
        self.p = self.p.max(o.p);
        self.p2p_pairs += o.p2p_pairs;
        self.m2l += o.m2l;
        self.m2m += o.m2m;
        self.l2l += o.l2l;
        self.p2m_points += o.p2m_points;
        self.l2p_points += o.l2p_points;
    }
}

impl WorkCounters {
    /// Kernel evaluations plus `p^2`-weighted M2L applications.
    pub fn work(&self) -> f64 {
        self.p2p_pairs as f64 + self.m2l as f64 * (self.p * self.p) as f64
    }
}

/// Result of [`FmmEngine::evaluate`].
#[derive(Debug, Clone)]
pub struct EvalReport<T> {
    /// Potentials in the input order of the evaluation points.
    pub potentials: Vec<C<T>>,
    pub timings: PhaseTimings,
    pub counters: WorkCounters,
}

/// Sources and evaluation points in tree order.
struct TreeData<T> {
    pyramid: Pyramid<T>,
    connectivity: Connectivity,
    src_pos: Vec<C<T>>,
    src_m: Vec<C<T>>,
    cores: Option<Vec<T>>,
    eval_pos: Vec<C<T>>,
}

fn zeros<T: Scalar>(n: usize) -> Vec<C<T>> {
    vec![C::new(T::zero(), T::zero()); n]
}

fn cast_smoother<T: Scalar>(s: &Smoother<f64>) -> Smoother<T> {
    match *s {
        Smoother::Gaussian { delta } => Smoother::Gaussian { delta: T::of(delta) },
        Smoother::Plummer { delta } => Smoother::Plummer { delta: T::of(delta) },
    }
}

/// Separation rule for a configuration. With a Gaussian smoother, pairs
/// closer than the distance at which smoothing becomes negligible are kept in
/// the near field.
pub fn separation_for<T: Scalar>(config: &FmmConfig, sources: &SourceSet<T>) -> Result<Separation<T>> {
    let sep = Separation::theta(T::of(config.theta))?;
    let Some(s) = &config.smoother else {
        return Ok(sep);
    };
    let max_core = sources
        .cores()
        .map(|c| c.iter().fold(T::zero(), |a, &b| a.max(b)))
        .unwrap_or(T::zero());
    let max_delta = T::of(s.delta()).max(max_core);
    match cast_smoother::<T>(s).far_field_gap(T::of(config.tol), max_delta) {
        Some(gap) => Ok(sep.with_min_gap(gap)),
        None => Ok(sep),
    }
}

fn prepare<T: Scalar>(config: &FmmConfig, sources: &SourceSet<T>, evals: &EvalSet<T>) -> Result<TreeData<T>> {
    let pyramid = Pyramid::build(sources, evals, config.n_levels)?;
    let connectivity = Connectivity::build(&pyramid, &separation_for(config, sources)?)?;
    let perm = pyramid.permutation();
    let (pos, m) = (sources.positions(), sources.strengths());
    let src_pos = perm.par_iter().map(|&i| pos[i]).collect();
    let src_m = perm.par_iter().map(|&i| m[i]).collect();
    let cores = sources.cores().map(|c| perm.iter().map(|&i| c[i]).collect());
    let epos = evals.positions();
    let eval_pos = pyramid.eval_permutation().par_iter().map(|&i| epos[i]).collect();
    Ok(TreeData {
        pyramid,
        connectivity,
        src_pos,
        src_m,
        cores,
        eval_pos,
    })
}

/// P2M into every finest box, box-parallel on the current pool. Returns one
/// flat coefficient array for the finest level.
pub fn p2m_pass<T: Scalar>(
    pyramid: &Pyramid<T>,
    ops: &Operators<T>,
    src_pos: &[C<T>],
    src_m: &[C<T>],
) -> Vec<C<T>> {
    let n = ops.n_coeffs();
    let finest = pyramid.finest();
    let mut out = zeros(finest.len() * n);
    out.par_chunks_mut(n)
        .with_min_len(8)
        .zip(finest.par_iter())
        .for_each(|(dst, b)| {
            let r = b.point_range.clone();
            if !r.is_empty() {
                ops.p2m_into(b.center, &src_pos[r.clone()], &src_m[r], dst);
            }
        });
    out
}

/// Serial M2M from the finest level to the root. `levels` must hold the
/// finest level's outgoing expansions last; coarser levels are appended in
/// front. Returns the number of M2M translations.
fn m2m_pass<T: Scalar>(pyramid: &Pyramid<T>, ops: &Operators<T>, finest: Vec<C<T>>) -> (Vec<Vec<C<T>>>, u64) {
    let n = ops.n_coeffs();
    let nl = pyramid.n_levels();
    let mut levels: Vec<Vec<C<T>>> = (0..nl).map(|_| Vec::new()).collect();
    levels[nl - 1] = finest;
    let mut count = 0;
    for l in (0..nl - 1).rev() {
        let boxes = pyramid.level(l);
        let children = pyramid.level(l + 1);
        let mut cur = zeros(boxes.len() * n);
        for (b, bx) in boxes.iter().enumerate() {
            let dst = &mut cur[b * n..(b + 1) * n];
            for c in 4 * b..4 * b + 4 {
                if children[c].n_sources() == 0 {
                    continue;
                }
                ops.m2m_into(&levels[l + 1][c * n..(c + 1) * n], children[c].center, bx.center, dst);
                count += 1;
            }
        }
        levels[l] = cur;
    }
    (levels, count)
}

/// Outgoing expansions of every box: P2M at the finest level, then serial
/// M2M towards the root. Level `l` is a flat array of `4^l * (p + 1)`
/// coefficients.
pub fn upward_pass<T: Scalar>(
    pyramid: &Pyramid<T>,
    ops: &Operators<T>,
    src_pos: &[C<T>],
    src_m: &[C<T>],
) -> Vec<Vec<C<T>>> {
    m2m_pass(pyramid, ops, p2m_pass(pyramid, ops, src_pos, src_m)).0
}

struct Downward<'a, T> {
    pyramid: &'a Pyramid<T>,
    connectivity: &'a Connectivity,
    outgoing: &'a [Vec<C<T>>],
    ops: &'a Operators<T>,
}

#[derive(Default, Clone, Copy)]
struct DownCount {
    m2l: u64,
    l2l: u64,
}

impl std::ops::Add for DownCount {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            m2l: self.m2l + o.m2l,
            l2l: self.l2l + o.l2l,
        }
    }
}

impl<T: Scalar> Downward<'_, T> {
    /// Fill boxes `first..first + out.len()/n` of level `l` (`l >= 1`):
    /// L2L from the parent, then M2L from the weak partners in ascending
    /// order. `parent` holds the parent level starting at box `parent_first`.
    fn fill(&self, l: usize, first: usize, parent: &[C<T>], parent_first: usize, out: &mut [C<T>]) -> DownCount {
        let n = self.ops.n_coeffs();
        let boxes = self.pyramid.level(l);
        let parents = self.pyramid.level(l - 1);
        let links = self.connectivity.level(l);
        let mut count = DownCount::default();
        for (i, dst) in out.chunks_mut(n).enumerate() {
            let b = first + i;
            let bx = &boxes[b];
            if bx.n_evals() == 0 {
                continue;
            }
            let pb = b / 4;
            let pc = &parent[(pb - parent_first) * n..(pb - parent_first + 1) * n];
            self.ops.l2l_into(pc, parents[pb].center, bx.center, dst);
            count.l2l += 1;
            for &w in links.weak(b) {
                if boxes[w].n_sources() == 0 {
                    continue;
                }
                self.ops.m2l_into(&self.outgoing[l][w * n..(w + 1) * n], boxes[w].center, bx.center, dst);
                count.m2l += 1;
            }
        }
        count
    }
}

/// Local expansions of every box. Levels up to `split` are filled by the
/// calling task; below it every box at level `split` owns an independent
/// subtree task writing only its own slots. Returns the locals (same layout
/// as the outgoing expansions) and the M2L and L2L counts.
pub fn downward_pass<T: Scalar>(
    pyramid: &Pyramid<T>,
    connectivity: &Connectivity,
    outgoing: &[Vec<C<T>>],
    ops: &Operators<T>,
    split: usize,
) -> (Vec<Vec<C<T>>>, u64, u64) {
    let nl = pyramid.n_levels();
    let n = ops.n_coeffs();
    let split = split.min(nl - 1);
    let ctx = Downward {
        pyramid,
        connectivity,
        outgoing,
        ops,
    };
    let mut locals: Vec<Vec<C<T>>> = (0..nl).map(|l| zeros(pyramid.level(l).len() * n)).collect();
    let mut count = DownCount::default();
    for l in 1..=split {
        let (up, down) = locals.split_at_mut(l);
        count = count + ctx.fill(l, 0, &up[l - 1], 0, &mut down[0]);
    }
    if split + 1 < nl {
        let (upper, lower) = locals.split_at_mut(split + 1);
        let top = &upper[split];
        let n_tasks = pyramid.level(split).len();
        let mut tasks: Vec<Vec<&mut [C<T>]>> = (0..n_tasks).map(|_| Vec::with_capacity(lower.len())).collect();
        for (k, level) in lower.iter_mut().enumerate() {
            let per_task = 4usize.pow(k as u32 + 1) * n;
            for (t, chunk) in level.chunks_mut(per_task).enumerate() {
                tasks[t].push(chunk);
            }
        }
        count = count
            + tasks
                .into_par_iter()
                .enumerate()
                .map(|(b, mut chunks)| {
                    let mut c = DownCount::default();
                    let mut parent: &[C<T>] = &top[b * n..(b + 1) * n];
                    let mut parent_first = b;
                    for (k, chunk) in chunks.iter_mut().enumerate() {
                        let l = split + 1 + k;
                        let first = b * 4usize.pow(k as u32 + 1);
                        c = c + ctx.fill(l, first, parent, parent_first, chunk);
                        parent = &**chunk;
                        parent_first = first;
                    }
                    c
                })
                .reduce(DownCount::default, |a, b| a + b);
    }
    (locals, count.m2l, count.l2l)
}

/// Near-field potentials (tree order) through `backend`.
#[allow(clippy::too_many_arguments)]
pub fn nearfield_eval<T: Scalar>(
    backend: &dyn NearFieldBackend<T>,
    pyramid: &Pyramid<T>,
    connectivity: &Connectivity,
    src_pos: &[C<T>],
    src_m: &[C<T>],
    cores: Option<&[T]>,
    eval_pos: &[C<T>],
    kernel: Kernel,
    smoother: Option<Smoother<T>>,
) -> Result<Vec<C<T>>> {
    let job = NearFieldJob {
        kernel,
        smoother,
        boxes: pyramid.finest(),
        links: connectivity.finest(),
        source_pos: src_pos,
        source_m: src_m,
        source_cores: cores,
        eval_pos,
    };
    let out = backend.evaluate(&job)?;
    if out.len() != eval_pos.len() {
        return Err(FmmError::Backend {
            backend: backend.name().to_string(),
            phase: "near field",
            message: format!("returned {} values for {} evaluation points", out.len(), eval_pos.len()),
        });
    }
    Ok(out)
}

fn count_work<T: Scalar>(tree: &TreeData<T>, p: usize) -> WorkCounters {
    let pyr = &tree.pyramid;
    let mut c = WorkCounters {
        p,
        p2m_points: pyr.permutation().len() as u64,
        ..Default::default()
    };
    let finest = pyr.finest();
    let links = tree.connectivity.finest();
    for (b, bx) in finest.iter().enumerate() {
        let near: usize = links.strong(b).iter().map(|&s| finest[s].n_sources()).sum();
        c.p2p_pairs += (bx.n_evals() * near) as u64;
        c.l2p_points += bx.n_evals() as u64;
    }
    for l in 1..pyr.n_levels() {
        let boxes = pyr.level(l);
        let lc = tree.connectivity.level(l);
        c.m2m += boxes.iter().filter(|b| b.n_sources() > 0).count() as u64;
        for (b, bx) in boxes.iter().enumerate() {
            if bx.n_evals() == 0 {
                continue;
            }
            c.l2l += 1;
            c.m2l += lc.weak(b).iter().filter(|&&w| boxes[w].n_sources() > 0).count() as u64;
        }
    }
    c
}

/// Evaluation engine: owns the worker pool and the near-field backend.
pub struct FmmEngine<T: Scalar> {
    config: FmmConfig,
    pool: ThreadPool,
    backend: Box<dyn NearFieldBackend<T>>,
    ops: Option<Operators<T>>,
}

impl<T: Scalar> std::fmt::Debug for FmmEngine<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FmmEngine")
            .field("config", &self.config)
            .field("backend", &self.backend.name())
            .finish()
    }
}

impl<T: Scalar> FmmEngine<T> {
    pub fn new(config: FmmConfig) -> Result<Self> {
        let backend = config.backend.build::<T>()?;
        Self::with_backend(config, backend)
    }

    /// Use a caller-provided backend instead of `config.backend`.
    pub fn with_backend(config: FmmConfig, backend: Box<dyn NearFieldBackend<T>>) -> Result<Self> {
        config.validate()?;
        let pool = ThreadPoolBuilder::new()
            .num_threads(config.worker_threads)
            .thread_name(|i| format!("afmm-worker-{i}"))
            .build()
            .map_err(|e| FmmError::param("worker_threads", e.to_string()))?;
        Ok(Self {
            config,
            pool,
            backend,
            ops: None,
        })
    }

    pub fn config(&self) -> &FmmConfig {
        &self.config
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    /// Change the tuning parameters for the next evaluation.
    pub fn set_params(&mut self, theta: f64, n_levels: usize) -> Result<()> {
        let mut next = self.config.clone();
        next.theta = theta;
        next.n_levels = n_levels;
        next.validate()?;
        self.config = next;
        Ok(())
    }

    pub fn set_smoother(&mut self, smoother: Option<Smoother<f64>>) -> Result<()> {
        if let Some(s) = &smoother {
            s.validate()?;
        }
        self.config.smoother = smoother;
        Ok(())
    }

    pub fn p(&self) -> Result<usize> {
        self.config.p()
    }

    fn operators(&mut self) -> Result<Operators<T>> {
        let p = self.config.p()?;
        match &self.ops {
            Some(o) if o.p() == p && o.kernel() == self.config.kernel => {}
            _ => self.ops = Some(Operators::new(self.config.kernel, p)?),
        }
        Ok(self.ops.clone().expect("operators just set"))
    }

    /// Operation counts the current configuration would perform, without
    /// evaluating anything.
    pub fn plan(&self, sources: &SourceSet<T>, evals: &EvalSet<T>) -> Result<WorkCounters> {
        let p = self.config.p()?;
        let tree = self.pool.install(|| prepare(&self.config, sources, evals))?;
        Ok(count_work(&tree, p))
    }

    pub fn evaluate(&mut self, sources: &SourceSet<T>, evals: &EvalSet<T>) -> Result<EvalReport<T>> {
        let start = Instant::now();
        let ops = self.operators()?;
        let config = &self.config;
        let pool = &self.pool;
        let backend: &dyn NearFieldBackend<T> = &*self.backend;
        let mut t = PhaseTimings::default();

        let tree = pool.install(|| prepare(config, sources, evals))?;
        t.t_partition = start.elapsed().as_secs_f64();

        let mark = Instant::now();
        let finest = pool.install(|| p2m_pass(&tree.pyramid, &ops, &tree.src_pos, &tree.src_m));
        t.t_p2m = mark.elapsed().as_secs_f64();
        let mark = Instant::now();
        let (outgoing, _) = m2m_pass(&tree.pyramid, &ops, finest);
        t.t_upward = mark.elapsed().as_secs_f64();

        let smoother = config.smoother.as_ref().map(cast_smoother::<T>);
        let split = config.effective_split_level();
        let near_job = || {
            let mark = Instant::now();
            let r = nearfield_eval(
                backend,
                &tree.pyramid,
                &tree.connectivity,
                &tree.src_pos,
                &tree.src_m,
                tree.cores.as_deref(),
                &tree.eval_pos,
                config.kernel,
                smoother,
            );
            (r, mark.elapsed().as_secs_f64())
        };
        let far_job = || {
            let mark = Instant::now();
            let (locals, _, _) =
                pool.install(|| downward_pass(&tree.pyramid, &tree.connectivity, &outgoing, &ops, split));
            (locals, mark.elapsed().as_secs_f64())
        };

        let (near, locals) = match backend.capability() {
            Capability::Synchronous => {
                let (locals, tm) = far_job();
                let (near, tp) = near_job();
                t.t_m2l = tm;
                t.t_p2p = tp;
                (near, locals)
            }
            Capability::Concurrent => {
                t.hybrid = true;
                std::thread::scope(|s| {
                    let handle = s.spawn(near_job);
                    let (locals, tm) = far_job();
                    let wait = Instant::now();
                    let joined = handle.join();
                    t.cpu_wait = wait.elapsed().as_secs_f64();
                    t.t_m2l = tm;
                    match joined {
                        Ok((near, tp)) => {
                            t.t_p2p = tp;
                            (near, locals)
                        }
                        Err(_) => (
                            Err(FmmError::Backend {
                                backend: backend.name().to_string(),
                                phase: "near field",
                                message: "backend thread panicked".into(),
                            }),
                            locals,
                        ),
                    }
                })
            }
        };
        let near = near?;

        let mark = Instant::now();
        let potentials = pool.install(|| assemble(&tree, &ops, &locals, &near));
        t.t_assembly = mark.elapsed().as_secs_f64();
        t.t_total = start.elapsed().as_secs_f64();
        t.t_q = t.t_partition + t.t_p2m + t.t_upward + t.t_assembly;

        Ok(EvalReport {
            potentials,
            timings: t,
            counters: count_work(&tree, ops.p()),
        })
    }
}

/// L2P plus near field per finest box, scattered back to input order.
fn assemble<T: Scalar>(tree: &TreeData<T>, ops: &Operators<T>, locals: &[Vec<C<T>>], near: &[C<T>]) -> Vec<C<T>> {
    let n = ops.n_coeffs();
    let finest = tree.pyramid.finest();
    let local = locals.last().expect("at least one level");
    let far_active = tree.pyramid.n_levels() > 1;
    let mut tree_order = near.to_vec();
    let mut parts: Vec<(&MBox<T>, &mut [C<T>])> = Vec::with_capacity(finest.len());
    let mut rest: &mut [C<T>] = &mut tree_order;
    for bx in finest {
        let (head, tail) = std::mem::take(&mut rest).split_at_mut(bx.n_evals());
        rest = tail;
        if !head.is_empty() {
            parts.push((bx, head));
        }
    }
    if far_active {
        parts.into_par_iter().with_min_len(8).for_each(|(bx, out)| {
            let b = bx.index_in_level;
            let coeffs = &local[b * n..(b + 1) * n];
            for (o, y) in out.iter_mut().zip(&tree.eval_pos[bx.eval_range.clone()]) {
                *o += ops.l2p_at(coeffs, bx.center, *y);
            }
        });
    }
    let mut out = zeros(tree_order.len());
    for (k, &i) in tree.pyramid.eval_permutation().iter().enumerate() {
        out[i] = tree_order[k];
    }
    out
}
