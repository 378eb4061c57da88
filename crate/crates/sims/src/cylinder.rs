//! Impulsively started flow past a circular cylinder of radius `R` centred
//! at the origin.
//!
//! The conjugate velocity is the potential flow `V∞ (1 - R²/z²)` plus the
//! smoothed vortices and one mirror per vortex at `R²/x̄_k` with strength
//! `-Γ_k`. The mirror of a vortex with core `δ` gets the core `δR/|x_k|`:
//! on the wall `|z - R²/x̄| = |z - x| R/|x|`, so both members of a pair see
//! the same smoothing factor there and the wall stays impermeable exactly.
//!
//! The no-slip condition is restored after each convection step by emitting
//! a ring of vortices just outside the wall whose strengths cancel the
//! tangential slip at the collocation points.

use std::f64::consts::PI;

use afmm::{EvalSet64, FmmEngine64, Kernel, SourceSet64, C64};
use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SimError};
use crate::vortex::VortexSystem;
use crate::{snapshot_rows, Field, Simulation, SnapshotRow, StepStats};

/// Largest condition number accepted for the emission system.
const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderFlow {
    /// Physical vortices, all outside the cylinder.
    pub vortices: VortexSystem,
    pub radius: f64,
    pub v_inf: f64,
    /// Peripheral speed of the wall (counter-clockwise positive).
    pub omega_wall: f64,
    /// Viscosity; only sets the emission offset.
    pub nu: f64,
    pub n_collocation: usize,
    /// Stage positions that fell inside the cylinder and were put back.
    pub reflections: u64,
}

/// Result of one boundary emission.
#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub positions: Vec<C64>,
    pub strengths: Vec<f64>,
    /// Ratio of extreme singular values of the collocation matrix.
    pub condition: f64,
}

impl CylinderFlow {
    /// Flow without vortices. The smoothing radius is twice the emission
    /// offset `sqrt(ν dt / 2)`.
    pub fn new(radius: f64, v_inf: f64, omega_wall: f64, nu: f64, dt: f64, n_collocation: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(SimError::param("radius", "must be positive"));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(SimError::param("nu", "must be positive"));
        }
        if !(v_inf.is_finite() && omega_wall.is_finite()) {
            return Err(SimError::param("v_inf", "free-stream and wall speeds must be finite"));
        }
        if n_collocation < 8 {
            return Err(SimError::param("n_collocation", format!("{n_collocation} < 8")));
        }
        let offset = (0.5 * nu * dt).sqrt();
        let vortices = VortexSystem::new(Vec::new(), Vec::new(), 2.0 * offset.max(f64::MIN_POSITIVE), dt)?;
        Ok(Self {
            vortices,
            radius,
            v_inf,
            omega_wall,
            nu,
            n_collocation,
            reflections: 0,
        })
    }

    /// Add vortices (they must lie outside the cylinder).
    pub fn with_vortices(mut self, positions: Vec<C64>, circulations: Vec<f64>) -> Result<Self> {
        let v = VortexSystem::new(positions, circulations, self.vortices.delta, self.vortices.dt)?;
        self.vortices = v;
        self.check_outside()?;
        Ok(self)
    }

    pub fn emission_offset(&self) -> f64 {
        (0.5 * self.nu * self.vortices.dt).sqrt()
    }

    fn check_outside(&self) -> Result<()> {
        match self.vortices.positions.iter().position(|z| z.norm() < self.radius) {
            Some(k) => Err(SimError::InvalidState(format!(
                "vortex {k} at |x| = {} is inside the cylinder of radius {}",
                self.vortices.positions[k].norm(),
                self.radius
            ))),
            None => Ok(()),
        }
    }

    /// Wall points at uniform angles, starting on the positive real axis.
    pub fn collocation_points(&self) -> Vec<C64> {
        let n = self.n_collocation;
        (0..n).map(|i| C64::from_polar(self.radius, 2.0 * PI * i as f64 / n as f64)).collect()
    }

    /// Conjugate velocity of the potential flow around the cylinder.
    fn free_stream(&self, z: C64) -> C64 {
        let r2 = self.radius * self.radius;
        self.v_inf * (1.0 - r2 / (z * z))
    }

    /// Vortices followed by their mirrors, with per-source cores.
    fn sources_at(&self, positions: &[C64]) -> Result<SourceSet64> {
        let r2 = self.radius * self.radius;
        let delta = self.vortices.delta;
        let n = positions.len();
        let mut pos = Vec::with_capacity(2 * n);
        let mut m = Vec::with_capacity(2 * n);
        let mut cores = Vec::with_capacity(2 * n);
        for (x, g) in positions.iter().zip(&self.vortices.circulations) {
            pos.push(*x);
            m.push(C64::new(0.0, g / (2.0 * PI)));
            cores.push(delta);
        }
        for (x, g) in positions.iter().zip(&self.vortices.circulations) {
            pos.push(r2 / x.conj());
            m.push(C64::new(0.0, -g / (2.0 * PI)));
            cores.push(delta * self.radius / x.norm());
        }
        Ok(SourceSet64::new(pos, m)?.with_cores(cores)?)
    }

    /// Velocity at arbitrary points by direct summation over all vortices
    /// and mirrors.
    pub fn velocity_direct(&self, points: &[C64]) -> Vec<C64> {
        let r2 = self.radius * self.radius;
        let delta = self.vortices.delta;
        let vort = &self.vortices;
        points
            .iter()
            .map(|&z| {
                let mut w = self.free_stream(z);
                for (x, g) in vort.positions.iter().zip(&vort.circulations) {
                    let img = r2 / x.conj();
                    w += unit_vortex(z, *x, delta) * *g;
                    w -= unit_vortex(z, img, delta * self.radius / x.norm()) * *g;
                }
                w.conj()
            })
            .collect()
    }

    /// Radial and tangential velocity at each collocation point.
    pub fn wall_velocity(&self) -> Vec<(f64, f64)> {
        let pts = self.collocation_points();
        self.velocity_direct(&pts)
            .iter()
            .zip(&pts)
            .map(|(v, c)| {
                let n = c / c.norm();
                let t = C64::new(0.0, 1.0) * n;
                ((v * n.conj()).re, (v * t.conj()).re)
            })
            .collect()
    }

    /// FMM velocities of vortices placed at `positions` (mirrors follow).
    fn velocities_at(&self, positions: &[C64], engine: &mut FmmEngine64) -> Result<Field> {
        if positions.is_empty() {
            return Ok(Field::zeros(0));
        }
        if engine.config().kernel != Kernel::Harmonic {
            return Err(SimError::param("kernel", "cylinder flow needs the harmonic kernel"));
        }
        engine.set_smoother(Some(self.vortices.smoother()))?;
        let sources = self.sources_at(positions)?;
        let evals = EvalSet64::new(positions.to_vec())?;
        let report = engine.evaluate(&sources, &evals)?;
        Ok(Field::from_report(report, |i| self.free_stream(positions[i])))
    }

    /// Put a stage position back outside the wall.
    fn reflect(&mut self, z: &mut C64) {
        let r = z.norm();
        if r < self.radius {
            let target = self.radius * (1.0 + 1e-9);
            *z = if r > 0.0 { *z * (target / r) } else { C64::new(target, 0.0) };
            self.reflections += 1;
        }
    }
}

/// Conjugate velocity at `z` of a unit vortex at `x` with smoothing `core`.
fn unit_vortex(z: C64, x: C64, core: f64) -> C64 {
    let d = z - x;
    let r2 = d.norm_sqr();
    if r2 == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let g = 1.0 - (-r2 / (core * core)).exp();
    C64::new(0.0, -1.0 / (2.0 * PI)) / d * g
}

/// Velocities of the physical vortices: free stream plus all vortices and
/// their mirrors, `2N` sources for `N` evaluation points.
pub fn cylinder_velocities(flow: &CylinderFlow, engine: &mut FmmEngine64) -> Result<Field> {
    flow.check_outside()?;
    flow.velocities_at(&flow.vortices.positions, engine)
}

/// Emit one vortex per collocation point on the circle of radius
/// `R + sqrt(ν dt / 2)` so that the tangential velocity at the collocation
/// points equals the wall speed. Zero strengths are not added.
pub fn emit_boundary_vortices(flow: &mut CylinderFlow) -> Result<Emission> {
    let n = flow.n_collocation;
    if n < 8 {
        return Err(SimError::param("n_collocation", format!("{n} < 8")));
    }
    let r2 = flow.radius * flow.radius;
    let delta = flow.vortices.delta;
    let ring = flow.radius + flow.emission_offset();
    let cols = flow.collocation_points();
    let sites: Vec<C64> = (0..n).map(|j| C64::from_polar(ring, 2.0 * PI * j as f64 / n as f64)).collect();
    let tangents: Vec<C64> = cols.iter().map(|c| C64::new(0.0, 1.0) * c / c.norm()).collect();

    let a = DMatrix::from_fn(n, n, |i, j| {
        let x = sites[j];
        let w = unit_vortex(cols[i], x, delta) - unit_vortex(cols[i], r2 / x.conj(), delta * flow.radius / x.norm());
        (w.conj() * tangents[i].conj()).re
    });
    let slip = flow.wall_velocity();
    let b = DVector::from_iterator(n, slip.iter().map(|(_, ut)| flow.omega_wall - ut));

    let sv = a.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition.is_finite() && condition < MAX_CONDITION) {
        return Err(SimError::EmissionFailure { condition });
    }
    let gamma = a.lu().solve(&b).ok_or(SimError::EmissionFailure { condition })?;

    let mut emission = Emission {
        positions: Vec::with_capacity(n),
        strengths: Vec::with_capacity(n),
        condition,
    };
    for (z, g) in sites.iter().zip(gamma.iter()) {
        if *g != 0.0 {
            emission.positions.push(*z);
            emission.strengths.push(*g);
        }
    }
    flow.vortices.positions.extend_from_slice(&emission.positions);
    flow.vortices.circulations.extend_from_slice(&emission.strengths);
    Ok(emission)
}

/// One classical RK4 step of the vortex positions. Mirrors are rebuilt for
/// every stage; a stage position inside the cylinder is moved to
/// `R (1 + 1e-9)` and counted in [`CylinderFlow::reflections`].
pub fn rk4_convect(flow: &mut CylinderFlow, engine: &mut FmmEngine64) -> Result<StepStats> {
    let mut stats = StepStats::default();
    if flow.vortices.is_empty() {
        return Ok(stats);
    }
    flow.check_outside()?;
    let dt = flow.vortices.dt;
    let x0 = flow.vortices.positions.clone();
    let mut ks: Vec<Vec<C64>> = Vec::with_capacity(4);
    for (s, c) in [0.0, 0.5, 0.5, 1.0].into_iter().enumerate() {
        let mut stage: Vec<C64> = match ks.last() {
            Some(k) => x0.iter().zip(k).map(|(x, v)| x + v * (c * dt)).collect(),
            None => x0.clone(),
        };
        if s > 0 {
            for z in &mut stage {
                flow.reflect(z);
            }
        }
        let f = flow.velocities_at(&stage, engine)?;
        stats.add(&f);
        ks.push(f.values);
    }
    let mut next: Vec<C64> = (0..x0.len())
        .map(|i| x0[i] + (ks[0][i] + ks[1][i] * 2.0 + ks[2][i] * 2.0 + ks[3][i]) * (dt / 6.0))
        .collect();
    for z in &mut next {
        flow.reflect(z);
    }
    flow.vortices.positions = next;
    flow.vortices.velocities_mut().clone_from(&ks[0]);
    Ok(stats)
}

impl Simulation for CylinderFlow {
    fn name(&self) -> &'static str {
        "cylinder"
    }

    fn len(&self) -> usize {
        self.vortices.len()
    }

    /// RK4 convection followed by boundary emission.
    fn step(&mut self, engine: &mut FmmEngine64) -> Result<StepStats> {
        let stats = rk4_convect(self, engine)?;
        emit_boundary_vortices(self)?;
        Ok(stats)
    }

    fn sources(&self) -> Result<SourceSet64> {
        self.sources_at(&self.vortices.positions)
    }

    fn snapshot(&self, step: u64) -> Vec<SnapshotRow> {
        let v = &self.vortices;
        snapshot_rows(step, &v.positions, &v.circulations, v.velocities())
    }
}
