//! A-priori operation-count model for the 2D FMM.

use std::f64::consts::PI;

use crate::connectivity::check_theta;
use crate::error::{FmmError, Result};
use crate::pyramid::finest_box_count;

/// Predicted operation counts per phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub c_p2p: f64,
    pub c_m2l: f64,
    pub c_m2m: f64,
    pub c_p2m: f64,
}

impl CostEstimate {
    pub fn total(&self) -> f64 {
        self.c_p2p + self.c_m2l + self.c_m2m + self.c_p2m
    }
}

/// Each finest box sees the sources inside a disc of radius about
/// `(1 + θ)/θ` box radii in the near field, and the same number of boxes as
/// M2L partners, of which on average three halves per box survive across
/// levels.
pub fn estimate_cost(n: usize, n_levels: usize, theta: f64, p: usize) -> Result<CostEstimate> {
    if n == 0 {
        return Err(FmmError::param("n", "must be positive"));
    }
    if n_levels == 0 {
        return Err(FmmError::param("n_levels", "must be at least 1"));
    }
    if p == 0 {
        return Err(FmmError::param("p", "must be at least 1"));
    }
    check_theta(theta)?;
    let nf = finest_box_count(n_levels) as f64;
    let n = n as f64;
    let p2 = (p * p) as f64;
    let reach = PI * ((1.0 + theta) / theta).powi(2);
    Ok(CostEstimate {
        c_p2p: n * n / (2.0 * nf) * reach,
        c_m2l: 1.5 * nf * p2 * reach,
        c_m2m: 4.0 / 3.0 * nf * p2,
        c_p2m: n * p as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let c = estimate_cost(1_000_000, 6, 0.5, 17).unwrap();
        let p2p = 1e12 / 2048.0 * 9.0 * PI;
        assert!((c.c_p2p - p2p).abs() <= 1e-12 * p2p);
        assert!((c.c_p2p - 1.3806e10).abs() / 1.3806e10 < 1e-4);
        let m2l = 1536.0 * 289.0 * 9.0 * PI;
        assert!((c.c_m2l - m2l).abs() <= 1e-12 * m2l);
        assert!((c.c_m2l - 1.2551e7).abs() / 1.2551e7 < 1e-4);
        assert_eq!(c.c_p2m, 17e6);
    }

    #[test]
    fn scaling_in_n() {
        let a = estimate_cost(5000, 4, 0.5, 10).unwrap();
        let b = estimate_cost(10000, 4, 0.5, 10).unwrap();
        assert!((b.c_p2p / a.c_p2p - 4.0).abs() < 1e-12);
        assert_eq!(a.c_m2l, b.c_m2l);
        assert!(estimate_cost(10, 2, 1.0, 3).is_err());
        assert!(estimate_cost(0, 2, 0.5, 3).is_err());
    }
}
