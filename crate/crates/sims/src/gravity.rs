//! Softened 2D gravity: the rotating-galaxy application.
//!
//! Body `j` pulls body `i` with magnitude `G m_j / sqrt(δ² + r_ij²)` towards
//! `x_j`. With strengths `G m_j` and the Plummer smoother, the conjugate of
//! the engine's harmonic potential is exactly that sum in the near field;
//! well-separated boxes use the unsoftened far field, whose relative
//! deviation `δ²/2r²` is negligible once `δ` is small against box spacing.

use std::f64::consts::PI;

use afmm::{EvalSet64, FmmEngine64, Kernel, Smoother, SourceSet64, C64};
use rand::Rng;

use crate::error::{Result, SimError};
use crate::{snapshot_rows, Field, Simulation, SnapshotRow, StepStats};

/// Magnitude of the softened force of a mass `m` at distance `r`.
pub fn pair_force(g: f64, m: f64, r: f64, delta: f64) -> f64 {
    g * m / (delta * delta + r * r).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GravitySystem {
    pub positions: Vec<C64>,
    pub velocities: Vec<C64>,
    pub masses: Vec<f64>,
    pub g: f64,
    /// Softening radius.
    pub delta: f64,
    pub dt: f64,
    /// Accelerations at the current positions, reused by the next step.
    accel: Option<Vec<C64>>,
}

impl GravitySystem {
    pub fn new(positions: Vec<C64>, velocities: Vec<C64>, masses: Vec<f64>, g: f64, delta: f64, dt: f64) -> Result<Self> {
        let n = positions.len();
        if velocities.len() != n || masses.len() != n {
            return Err(SimError::param(
                "masses",
                format!("{n} positions, {} velocities, {} masses", velocities.len(), masses.len()),
            ));
        }
        if masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(SimError::param("masses", "must be positive and finite"));
        }
        if !(g.is_finite() && delta > 0.0 && delta.is_finite() && dt > 0.0 && dt.is_finite()) {
            return Err(SimError::param("g/delta/dt", "G finite, softening and time step positive"));
        }
        Ok(Self {
            positions,
            velocities,
            masses,
            g,
            delta,
            dt,
            accel: None,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn smoother(&self) -> Smoother<f64> {
        Smoother::Plummer { delta: self.delta }
    }

    /// Engine sources: strengths `G m`.
    pub fn sources(&self) -> Result<SourceSet64> {
        let m: Vec<f64> = self.masses.iter().map(|m| self.g * m).collect();
        Ok(SourceSet64::with_real_strengths(self.positions.clone(), &m)?)
    }

    pub fn momentum(&self) -> C64 {
        self.velocities.iter().zip(&self.masses).map(|(v, m)| v * m).sum()
    }

    /// `Σ m (x × v)`.
    pub fn angular_momentum(&self) -> f64 {
        self.positions
            .iter()
            .zip(&self.velocities)
            .zip(&self.masses)
            .map(|((x, v), m)| m * (x.re * v.im - x.im * v.re))
            .sum()
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.velocities.iter().zip(&self.masses).map(|(v, m)| 0.5 * m * v.norm_sqr()).sum()
    }

    /// Negate every velocity. The cached accelerations stay valid.
    pub fn reverse(&mut self) {
        for v in &mut self.velocities {
            *v = -*v;
        }
    }

    /// Drop the cached accelerations, e.g. after editing positions.
    pub fn invalidate(&mut self) {
        self.accel = None;
    }
}

/// Uniform sample of `n` equal masses (total mass one) in a disc of
/// `radius`, rotating rigidly with angular velocity `omega`.
///
/// `G = 1`, the softening is `0.01 · radius` and the time step is
/// `0.01 · radius`.
pub fn init_rotating_disc<R: Rng + ?Sized>(n: usize, radius: f64, omega: f64, rng: &mut R) -> Result<GravitySystem> {
    if n == 0 {
        return Err(SimError::param("n", "need at least one body"));
    }
    if !(radius > 0.0 && radius.is_finite() && omega.is_finite()) {
        return Err(SimError::param("radius", "radius must be positive, omega finite"));
    }
    let mut positions = Vec::with_capacity(n);
    let mut velocities = Vec::with_capacity(n);
    for _ in 0..n {
        let r = radius * rng.gen::<f64>().sqrt();
        let phi = 2.0 * PI * rng.gen::<f64>();
        let x = C64::from_polar(r, phi);
        positions.push(x);
        velocities.push(C64::new(0.0, omega) * x);
    }
    // G = 1 and unit total mass: the free-fall time scale is ~ radius.
    let dt = 0.01 * radius;
    GravitySystem::new(positions, velocities, vec![1.0 / n as f64; n], 1.0, 0.01 * radius, dt)
}

/// Accelerations of every body.
pub fn gravity_forces(sys: &GravitySystem, engine: &mut FmmEngine64) -> Result<Field> {
    if engine.config().kernel != Kernel::Harmonic {
        return Err(SimError::param("kernel", "gravity needs the harmonic kernel"));
    }
    if sys.len() < 2 {
        return Ok(Field::zeros(sys.len()));
    }
    engine.set_smoother(Some(sys.smoother()))?;
    let sources = sys.sources()?;
    let report = engine.evaluate(&sources, &EvalSet64::at_sources(&sources))?;
    Ok(Field::from_report(report, |_| C64::new(0.0, 0.0)))
}

/// Velocity Störmer-Verlet (kick-drift-kick). `force` maps a system to the
/// accelerations at its current positions; it is called once per step, the
/// first half kick reusing the previous step's result.
pub fn stormer_verlet_step<F>(sys: &mut GravitySystem, mut force: F) -> Result<()>
where
    F: FnMut(&GravitySystem) -> Result<Vec<C64>>,
{
    let n = sys.len();
    let a0 = match sys.accel.take() {
        Some(a) => a,
        None => force(sys)?,
    };
    check_len(&a0, n)?;
    let h = 0.5 * sys.dt;
    for ((x, v), a) in sys.positions.iter_mut().zip(sys.velocities.iter_mut()).zip(&a0) {
        *v += a * h;
        *x += *v * sys.dt;
    }
    let a1 = force(sys)?;
    check_len(&a1, n)?;
    for (v, a) in sys.velocities.iter_mut().zip(&a1) {
        *v += a * h;
    }
    sys.accel = Some(a1);
    Ok(())
}

fn check_len(a: &[C64], n: usize) -> Result<()> {
    if a.len() == n {
        Ok(())
    } else {
        Err(SimError::InvalidState(format!("{} accelerations for {n} bodies", a.len())))
    }
}

impl Simulation for GravitySystem {
    fn name(&self) -> &'static str {
        "galaxy"
    }

    fn len(&self) -> usize {
        self.positions.len()
    }

    fn step(&mut self, engine: &mut FmmEngine64) -> Result<StepStats> {
        let mut stats = StepStats::default();
        stormer_verlet_step(self, |s| {
            let f = gravity_forces(s, engine)?;
            stats.add(&f);
            Ok(f.values)
        })?;
        Ok(stats)
    }

    fn sources(&self) -> Result<SourceSet64> {
        GravitySystem::sources(self)
    }

    fn snapshot(&self, step: u64) -> Vec<SnapshotRow> {
        snapshot_rows(step, &self.positions, &self.masses, &self.velocities)
    }
}
