//! Synthetic runtime landscape for exercising the controllers without
//! running an FMM.
//!
//! `time(θ, n) = scale · f(θ) · g(n) · (1 + saw(θ)) · (1 + noise · u)` where
//! `f` is the lower envelope of quadratic basins in θ, `g` a quadratic bowl
//! around the best `n_levels`, `saw` a saw-tooth ripple and `u ~ U[0, 1)`.

use rand::Rng;

use crate::error::{Result, TuneError};
use crate::tuner::Params;

/// One quadratic valley `depth + curvature · (θ - center)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Basin {
    pub center: f64,
    pub depth: f64,
    pub curvature: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadOracle {
    pub basins: Vec<Basin>,
    /// Shift of every basin center per iteration.
    pub drift: f64,
    /// From this iteration on, the depths of the first two basins are swapped.
    pub switch_at: Option<u64>,
    pub nl_opt: f64,
    pub nl_curvature: f64,
    pub saw_amplitude: f64,
    pub saw_period: f64,
    pub noise: f64,
    pub scale: f64,
    /// Reported far-field wait per missing level below `nl_opt`.
    pub wait_per_level: f64,
    /// Model a synchronous near field: no wait signal.
    pub synchronous: bool,
}

impl WorkloadOracle {
    /// One static valley in θ, no ripple, light noise.
    pub fn single_basin(theta_opt: f64, nl_opt: usize) -> Self {
        Self {
            basins: vec![Basin {
                center: theta_opt,
                depth: 1.0,
                curvature: 20.0,
            }],
            drift: 0.0,
            switch_at: None,
            nl_opt: nl_opt as f64,
            nl_curvature: 0.15,
            saw_amplitude: 0.0,
            saw_period: 0.05,
            noise: 0.002,
            scale: 0.1,
            wait_per_level: 0.01,
            synchronous: false,
        }
    }

    /// A valley whose optimum moves by `drift` per iteration.
    pub fn drifting(theta_start: f64, drift: f64, nl_opt: usize) -> Self {
        Self {
            drift,
            ..Self::single_basin(theta_start, nl_opt)
        }
    }

    /// Two valleys; the deeper one changes at `switch_at`.
    pub fn switching(a: f64, b: f64, switch_at: u64, nl_opt: usize) -> Self {
        Self {
            basins: vec![
                Basin {
                    center: a,
                    depth: 1.0,
                    curvature: 20.0,
                },
                Basin {
                    center: b,
                    depth: 1.08,
                    curvature: 20.0,
                },
            ],
            switch_at: Some(switch_at),
            ..Self::single_basin(a, nl_opt)
        }
    }

    pub fn with_sawtooth(mut self, amplitude: f64, period: f64) -> Self {
        self.saw_amplitude = amplitude;
        self.saw_period = period;
        self
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn synchronous(mut self) -> Self {
        self.synchronous = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(TuneError::InvalidParameter { name, reason: reason.into() });
        if self.basins.is_empty() {
            return bad("basins", "need at least one basin");
        }
        if self.basins.iter().any(|b| !(b.depth > 0.0 && b.curvature >= 0.0)) {
            return bad("basins", "depths must be positive and curvatures non-negative");
        }
        if !(self.scale > 0.0) || self.noise < 0.0 || self.saw_amplitude < 0.0 || self.nl_curvature < 0.0 {
            return bad("oracle", "scale must be positive; noise, ripple and curvature non-negative");
        }
        if self.saw_amplitude > 0.0 && !(self.saw_period > 0.0) {
            return bad("saw_period", "must be positive");
        }
        Ok(())
    }

    fn basins_at(&self, iteration: u64) -> Vec<Basin> {
        let mut b = self.basins.clone();
        for basin in &mut b {
            basin.center += self.drift * iteration as f64;
        }
        if let Some(s) = self.switch_at {
            if iteration >= s && b.len() >= 2 {
                let d0 = b[0].depth;
                b[0].depth = b[1].depth;
                b[1].depth = d0;
            }
        }
        b
    }

    /// Noise-free runtime.
    pub fn mean_time(&self, iteration: u64, p: Params) -> f64 {
        let f = self
            .basins_at(iteration)
            .iter()
            .map(|b| b.depth + b.curvature * (p.theta - b.center).powi(2))
            .fold(f64::INFINITY, f64::min);
        let g = 1.0 + self.nl_curvature * (p.n_levels as f64 - self.nl_opt).powi(2);
        let saw = if self.saw_amplitude > 0.0 {
            self.saw_amplitude * (p.theta / self.saw_period).fract()
        } else {
            0.0
        };
        self.scale * f * g * (1.0 + saw)
    }

    pub fn time<R: Rng + ?Sized>(&self, iteration: u64, p: Params, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        self.mean_time(iteration, p) * (1.0 + self.noise * u)
    }

    pub fn cpu_wait(&self, p: Params) -> Option<f64> {
        if self.synchronous {
            None
        } else {
            Some((self.nl_opt - p.n_levels as f64).max(0.0) * self.wait_per_level)
        }
    }

    /// Location of the deepest valley at `iteration` (ripple ignored).
    pub fn optimum(&self, iteration: u64) -> Params {
        let best = self
            .basins_at(iteration)
            .into_iter()
            .min_by(|a, b| a.depth.total_cmp(&b.depth))
            .expect("validated: at least one basin");
        Params {
            theta: best.center,
            n_levels: self.nl_opt.round() as usize,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use afmm::rng::substream;

    #[test]
    fn minimum_at_basin_center() {
        let o = WorkloadOracle::single_basin(0.5, 4).with_noise(0.0);
        let best = o.mean_time(0, Params::new(0.5, 4));
        for t in [0.3, 0.45, 0.49, 0.51, 0.7] {
            assert!(o.mean_time(0, Params::new(t, 4)) > best);
        }
        assert!(o.mean_time(0, Params::new(0.5, 3)) > best);
        assert!(o.mean_time(0, Params::new(0.5, 5)) > best);
        assert_eq!(o.optimum(0), Params::new(0.5, 4));
    }

    #[test]
    fn switching_and_drift() {
        let o = WorkloadOracle::switching(0.4, 0.65, 100, 4);
        assert_eq!(o.optimum(99).theta, 0.4);
        assert_eq!(o.optimum(100).theta, 0.65);
        let d = WorkloadOracle::drifting(0.4, 0.001, 4);
        assert!((d.optimum(100).theta - 0.5).abs() < 1e-12);
    }

    #[test]
    fn noise_is_bounded_and_positive() {
        let o = WorkloadOracle::single_basin(0.5, 4).with_noise(0.1).with_sawtooth(0.05, 0.05);
        let mut rng = substream(3, "noise");
        for i in 0..1000 {
            let p = Params::new(0.3 + (i % 50) as f64 * 0.01, 1 + i as usize % 8);
            let m = o.mean_time(i, p);
            let t = o.time(i, p, &mut rng);
            assert!(t >= m && t <= m * 1.1 && t > 0.0);
        }
    }

    #[test]
    fn wait_signal() {
        let o = WorkloadOracle::single_basin(0.5, 5);
        assert!(o.cpu_wait(Params::new(0.5, 3)).unwrap() > 0.0);
        assert_eq!(o.cpu_wait(Params::new(0.5, 5)), Some(0.0));
        assert_eq!(o.clone().synchronous().cpu_wait(Params::new(0.5, 3)), None);
        assert!(o.validate().is_ok());
        let mut bad = o;
        bad.basins.clear();
        assert!(bad.validate().is_err());
    }
}
