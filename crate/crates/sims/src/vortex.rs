//! Point vortices with Gaussian smoothing: the shear-layer application.
//!
//! The conjugate velocity of a vortex system is
//! `u - iv = Σ Γ_j / (2πi (z - z_j)) · g_δ(|z - z_j|)`, which is the
//! engine's harmonic potential for strengths `m_j = iΓ_j / 2π`.

use std::f64::consts::PI;

use afmm::{EvalSet64, FmmEngine64, Kernel, Smoother, SourceSet64, C64};
use rand::Rng;

use crate::error::{Result, SimError};
use crate::{snapshot_rows, Field, Simulation, SnapshotRow, StepStats};

/// Gaussian smoother `1 - exp(-r²/δ²)`.
pub fn smoother(r: f64, delta: f64) -> Result<f64> {
    Ok(afmm::gaussian_smoother(r, delta)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VortexSystem {
    pub positions: Vec<C64>,
    pub circulations: Vec<f64>,
    /// Smoothing radius.
    pub delta: f64,
    pub dt: f64,
    velocities: Vec<C64>,
}

impl VortexSystem {
    pub fn new(positions: Vec<C64>, circulations: Vec<f64>, delta: f64, dt: f64) -> Result<Self> {
        if positions.len() != circulations.len() {
            return Err(SimError::param(
                "circulations",
                format!("{} positions but {} circulations", positions.len(), circulations.len()),
            ));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(SimError::param("delta", "smoothing radius must be positive"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::param("dt", "time step must be positive"));
        }
        if positions.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) || circulations.iter().any(|g| !g.is_finite()) {
            return Err(SimError::param("positions", "positions and circulations must be finite"));
        }
        Ok(Self {
            positions,
            circulations,
            delta,
            dt,
            velocities: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn total_circulation(&self) -> f64 {
        self.circulations.iter().sum()
    }

    pub fn smoother(&self) -> Smoother<f64> {
        Smoother::Gaussian { delta: self.delta }
    }

    /// Engine sources: strengths `iΓ / 2π`.
    pub fn sources(&self) -> Result<SourceSet64> {
        let m = self.circulations.iter().map(|&g| C64::new(0.0, g / (2.0 * PI))).collect();
        Ok(SourceSet64::new(self.positions.clone(), m)?)
    }

    /// Velocities from the most recent step (empty before the first one).
    pub fn velocities(&self) -> &[C64] {
        &self.velocities
    }

    pub(crate) fn velocities_mut(&mut self) -> &mut Vec<C64> {
        &mut self.velocities
    }

    /// Displace every vortex by a uniform random offset of at most
    /// `amplitude` in each coordinate.
    pub fn jitter<R: Rng + ?Sized>(&mut self, amplitude: f64, rng: &mut R) {
        for z in &mut self.positions {
            z.re += amplitude * (2.0 * rng.gen::<f64>() - 1.0);
            z.im += amplitude * (2.0 * rng.gen::<f64>() - 1.0);
        }
    }
}

/// Regular `nx × ny` lattice filling the rectangle `[-1/2, 1/2] × [-h/2, h/2]`
/// with `h = 1/aspect`. The upper half of the rows carries `+gamma`, the
/// lower half `-gamma`. `ny` is the even divisor of `n` closest to
/// `sqrt(n / aspect)`, which keeps the cells close to square.
///
/// The smoothing radius is twice the mean lattice spacing; the time step
/// moves a vortex about a quarter spacing at the layer's velocity scale.
pub fn init_shear_layer(n: usize, aspect: f64, gamma: f64) -> Result<VortexSystem> {
    if n == 0 || n % 2 == 1 {
        return Err(SimError::param("n", format!("{n} is not a positive even count")));
    }
    if !(aspect > 0.0 && aspect.is_finite()) {
        return Err(SimError::param("aspect", "must be positive"));
    }
    if !gamma.is_finite() {
        return Err(SimError::param("gamma", "must be finite"));
    }
    let target = (n as f64 / aspect).sqrt();
    let ny = (2..=n)
        .step_by(2)
        .filter(|d| n % d == 0)
        .min_by(|a, b| (*a as f64 - target).abs().total_cmp(&(*b as f64 - target).abs()))
        .expect("n is even, so 2 divides it");
    let nx = n / ny;
    let (width, height) = (1.0, 1.0 / aspect);
    let (dx, dy) = (width / nx as f64, height / ny as f64);

    let mut positions = Vec::with_capacity(n);
    let mut circulations = Vec::with_capacity(n);
    // Rows are stored as mirrored pairs, so the circulations alternate
    // -gamma, +gamma and their running sum is exactly zero after each pair.
    for j in 0..ny / 2 {
        let y = (j as f64 + 0.5) * dy;
        for i in 0..nx {
            let x = -0.5 * width + (i as f64 + 0.5) * dx;
            positions.push(C64::new(x, -y));
            circulations.push(-gamma);
            positions.push(C64::new(x, y));
            circulations.push(gamma);
        }
    }
    let spacing = (width * height / n as f64).sqrt();
    let speed = 0.5 * n as f64 * gamma.abs() / width;
    let dt = if speed > 0.0 { 0.25 * spacing / speed } else { spacing };
    VortexSystem::new(positions, circulations, 2.0 * spacing, dt)
}

/// Velocity of every vortex induced by all the others.
pub fn vortex_velocities(sys: &VortexSystem, engine: &mut FmmEngine64) -> Result<Field> {
    if engine.config().kernel != Kernel::Harmonic {
        return Err(SimError::param("kernel", "vortex velocities need the harmonic kernel"));
    }
    if sys.len() < 2 {
        return Ok(Field::zeros(sys.len()));
    }
    engine.set_smoother(Some(sys.smoother()))?;
    let sources = sys.sources()?;
    let report = engine.evaluate(&sources, &EvalSet64::at_sources(&sources))?;
    Ok(Field::from_report(report, |_| C64::new(0.0, 0.0)))
}

/// Forward Euler: `x ← x + dt·v`. Circulations are untouched.
pub fn euler_step(sys: &mut VortexSystem, velocities: &[C64]) -> Result<()> {
    if velocities.len() != sys.len() {
        return Err(SimError::InvalidState(format!(
            "{} velocities for {} vortices",
            velocities.len(),
            sys.len()
        )));
    }
    let dt = sys.dt;
    for (z, v) in sys.positions.iter_mut().zip(velocities) {
        *z += v * dt;
    }
    Ok(())
}

impl Simulation for VortexSystem {
    fn name(&self) -> &'static str {
        "vortex"
    }

    fn len(&self) -> usize {
        self.positions.len()
    }

    fn step(&mut self, engine: &mut FmmEngine64) -> Result<StepStats> {
        let field = vortex_velocities(self, engine)?;
        euler_step(self, &field.values)?;
        let mut stats = StepStats::default();
        stats.add(&field);
        self.velocities = field.values;
        Ok(stats)
    }

    fn sources(&self) -> Result<SourceSet64> {
        VortexSystem::sources(self)
    }

    fn snapshot(&self, step: u64) -> Vec<SnapshotRow> {
        snapshot_rows(step, &self.positions, &self.circulations, &self.velocities)
    }
}
