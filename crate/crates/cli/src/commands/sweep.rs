//! `sweep`: one evaluation per θ on a grid, fixed points and tree depth.

use std::fmt::Write as _;
use std::time::Instant;

use afmm::rng::substream;
use afmm::{EvalSet64, FmmEngine64, SourceSet64, C64};
use rand::Rng;

use crate::args::{Distribution, SweepArgs};
use crate::clock::step_time;
use crate::driver::{engine_config, TimingRow};
use crate::error::{CliError, Result};
use crate::output::CsvOut;

pub const DEFAULT_N: usize = 100_000;

/// Half-width of the band around the diagonal that holds the line points.
const LINE_WIDTH: f64 = 1e-3;

/// θ grid from `min` to `max` inclusive.
pub fn theta_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min > 0.0 && max < 1.0 && min <= max) {
        return Err(CliError::usage(format!("θ range [{min}, {max}] must satisfy 0 < min <= max < 1")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::usage("--theta-step must be positive"));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    // Rounded to the grid's resolution so printed values are exact.
    Ok((0..count).map(|k| ((min + k as f64 * step) * 1e9).round() / 1e9).collect())
}

/// `n` points with unit-interval strengths: uniform in the unit square, or
/// in a thin band along its diagonal.
pub fn points(dist: Distribution, n: usize, seed: u64) -> Result<SourceSet64> {
    let name = match dist {
        Distribution::Line => "sweep-line",
        _ => "sweep-uniform",
    };
    let mut rng = substream(seed, name);
    let mut pos = Vec::with_capacity(n);
    let mut m = Vec::with_capacity(n);
    for _ in 0..n {
        let z = match dist {
            Distribution::Line => {
                let s: f64 = rng.gen();
                let w = LINE_WIDTH * (2.0 * rng.gen::<f64>() - 1.0);
                C64::new(s - w, s + w)
            }
            _ => C64::new(rng.gen(), rng.gen()),
        };
        pos.push(z);
        m.push(rng.gen::<f64>());
    }
    Ok(SourceSet64::with_real_strengths(pos, &m)?)
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub distribution: Distribution,
    pub rows: Vec<TimingRow>,
}

impl SweepResult {
    /// θ with the smallest total time.
    pub fn argmin(&self) -> Option<f64> {
        self.rows
            .iter()
            .min_by(|a, b| a.timings.t_total.total_cmp(&b.timings.t_total))
            .map(|r| r.theta)
    }
}

/// Sweep one distribution; each grid point keeps the fastest of `repeats`.
pub fn sweep_one(args: &SweepArgs, dist: Distribution, n: usize) -> Result<SweepResult> {
    let c = &args.common;
    let grid = theta_grid(args.theta_min, args.theta_max, args.theta_step)?;
    if args.repeats == 0 {
        return Err(CliError::usage("--repeats must be at least 1"));
    }
    let src = points(dist, n, c.seed)?;
    let evals = EvalSet64::at_sources(&src);
    let mut cfg = engine_config(c, n)?;
    cfg.theta = grid[0];
    let nl = cfg.n_levels;
    let mut engine = FmmEngine64::new(cfg).map_err(|e| CliError::usage(e.to_string()))?;
    let mut rows = Vec::with_capacity(grid.len());
    for (k, &theta) in grid.iter().enumerate() {
        engine.set_params(theta, nl).map_err(|e| CliError::usage(e.to_string()))?;
        let p = engine.p()?;
        let mut best: Option<(f64, afmm::PhaseTimings)> = None;
        for _ in 0..args.repeats {
            let t0 = Instant::now();
            let report = engine.evaluate(&src, &evals)?;
            let (timings, _) = step_time(c.clock, report.timings, &report.counters, nl, t0.elapsed());
            if best.map_or(true, |(b, _)| timings.t_total < b) {
                best = Some((timings.t_total, timings));
            }
        }
        let (_, timings) = best.expect("at least one repeat");
        rows.push(TimingRow {
            iteration: k as u64,
            theta,
            n_levels: nl,
            p,
            timings,
        });
    }
    Ok(SweepResult { distribution: dist, rows })
}

pub fn dist_name(d: Distribution) -> &'static str {
    match d {
        Distribution::Uniform => "uniform",
        Distribution::Line => "line",
        Distribution::Both => "both",
    }
}

pub fn run(args: &SweepArgs, hash: &str) -> Result<String> {
    let n = args.common.n.unwrap_or(DEFAULT_N);
    if n == 0 {
        return Err(CliError::usage("--n must be positive"));
    }
    let dists = match args.dist {
        Distribution::Both => vec![Distribution::Uniform, Distribution::Line],
        d => vec![d],
    };
    let mut header = vec!["distribution"];
    header.extend(TimingRow::HEADER);
    let mut out = CsvOut::create(&args.common.out, "sweep.csv", hash, &header)?;
    let mut summary = String::new();
    for d in dists {
        let res = sweep_one(args, d, n)?;
        for row in &res.rows {
            let mut f = vec![dist_name(d).to_string()];
            f.extend(row.fields());
            out.row(f)?;
        }
        if let Some(t) = res.argmin() {
            writeln!(summary, "{} argmin theta = {t:.4}", dist_name(d)).ok();
        }
    }
    let path = out.finish()?;
    writeln!(summary, "wrote {}", path.display()).ok();
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shapes() {
        assert_eq!(theta_grid(0.35, 0.65, 0.01).unwrap().len(), 31);
        assert_eq!(theta_grid(0.5, 0.5, 0.01).unwrap(), vec![0.5]);
        let g = theta_grid(0.35, 0.65, 0.01).unwrap();
        assert_eq!(g[30], 0.65);
        assert!(theta_grid(0.6, 0.4, 0.01).is_err());
        assert!(theta_grid(0.0, 0.4, 0.01).is_err());
        assert!(theta_grid(0.3, 0.4, 0.0).is_err());
    }

    #[test]
    fn line_points_hug_the_diagonal() {
        let s = points(Distribution::Line, 500, 3).unwrap();
        assert!(s.positions().iter().all(|z| (z.im - z.re).abs() <= 2.0 * LINE_WIDTH + 1e-15));
        let u = points(Distribution::Uniform, 500, 3).unwrap();
        assert!(u.positions().iter().all(|z| (0.0..1.0).contains(&z.re) && (0.0..1.0).contains(&z.im)));
    }
}
