//! Strong / weak / decoupled classification of box pairs, level by level.

use rayon::prelude::*;

use crate::error::{FmmError, Result};
use crate::pyramid::{MBox, Pyramid};
use crate::scalar::Scalar;

/// The well-separatedness test `R + θ r <= θ d` for two boxes.
pub fn theta_criterion<T: Scalar>(a: &MBox<T>, b: &MBox<T>, theta: T) -> Result<bool> {
    check_theta(theta)?;
    Ok(well_separated(a, b, theta))
}

pub(crate) fn check_theta<T: Scalar>(theta: T) -> Result<()> {
    if theta > T::zero() && theta < T::one() {
        Ok(())
    } else {
        Err(FmmError::param("theta", format!("{theta} is outside (0, 1)")))
    }
}

#[inline]
fn well_separated<T: Scalar>(a: &MBox<T>, b: &MBox<T>, theta: T) -> bool {
    let (big, small) = if a.radius >= b.radius {
        (a.radius, b.radius)
    } else {
        (b.radius, a.radius)
    };
    let d = (a.center - b.center).norm();
    big + theta * small <= theta * d
}

/// Separation rule used when classifying children of strong pairs.
///
/// `min_gap` additionally requires `d - r_a - r_b >= min_gap` before a pair
/// may become weak. It is zero unless a near-field smoother is active, in
/// which case it keeps every pair whose smoothing factor differs from one
/// (beyond the tolerance) in the near field, where smoothing is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separation<T> {
    pub theta: T,
    pub min_gap: T,
}

impl<T: Scalar> Separation<T> {
    pub fn theta(theta: T) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self {
            theta,
            min_gap: T::zero(),
        })
    }

    pub fn with_min_gap(mut self, min_gap: T) -> Self {
        self.min_gap = min_gap.max(T::zero());
        self
    }

    #[inline]
    pub fn is_weak(&self, a: &MBox<T>, b: &MBox<T>) -> bool {
        if !well_separated(a, b, self.theta) {
            return false;
        }
        self.min_gap <= T::zero()
            || (a.center - b.center).norm() - a.radius - b.radius >= self.min_gap
    }
}

/// Interaction lists of one box. Both lists are sorted ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoxLinks {
    /// Strongly coupled boxes, always including the box itself.
    pub strong: Vec<usize>,
    /// Weakly coupled boxes: M2L partners at this level.
    pub weak: Vec<usize>,
}

/// Interaction lists of every box on one level.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LevelConnectivity {
    pub links: Vec<BoxLinks>,
}

impl LevelConnectivity {
    /// The root level: one box, strongly connected to itself.
    pub fn root() -> Self {
        Self {
            links: vec![BoxLinks {
                strong: vec![0],
                weak: Vec::new(),
            }],
        }
    }

    pub fn strong(&self, b: usize) -> &[usize] {
        &self.links[b].strong
    }

    pub fn weak(&self, b: usize) -> &[usize] {
        &self.links[b].weak
    }
}

/// Classify the boxes of `level` from the lists of `level - 1`.
///
/// Children of strong pairs stay strong unless they are well separated, in
/// which case they become weak. Children of weak pairs are decoupled.
pub fn classify_level<T: Scalar>(
    parent: &LevelConnectivity,
    pyramid: &Pyramid<T>,
    level: usize,
    sep: &Separation<T>,
) -> Result<LevelConnectivity> {
    check_theta(sep.theta)?;
    if level == 0 {
        return Ok(LevelConnectivity::root());
    }
    if level >= pyramid.n_levels() {
        return Err(FmmError::param("level", format!("{level} is beyond the pyramid depth {}", pyramid.n_levels())));
    }
    let boxes = pyramid.level(level);
    if parent.links.len() * 4 != boxes.len() {
        return Err(FmmError::InvalidInput(format!(
            "parent connectivity has {} boxes, level {level} has {}",
            parent.links.len(),
            boxes.len()
        )));
    }
    let links = boxes
        .par_iter()
        .with_min_len(64)
        .enumerate()
        .map(|(b, this)| {
            let mut out = BoxLinks::default();
            for &ps in parent.strong(b / 4) {
                for c in 4 * ps..4 * ps + 4 {
                    if c == b {
                        out.strong.push(c);
                    } else if sep.is_weak(this, &boxes[c]) {
                        out.weak.push(c);
                    } else {
                        out.strong.push(c);
                    }
                }
            }
            out
        })
        .collect();
    Ok(LevelConnectivity { links })
}

/// Interaction lists for every level of a pyramid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connectivity {
    levels: Vec<LevelConnectivity>,
}

impl Connectivity {
    pub fn build<T: Scalar>(pyramid: &Pyramid<T>, sep: &Separation<T>) -> Result<Self> {
        let mut levels = vec![LevelConnectivity::root()];
        for l in 1..pyramid.n_levels() {
            let next = classify_level(&levels[l - 1], pyramid, l, sep)?;
            levels.push(next);
        }
        Ok(Self { levels })
    }

    pub fn level(&self, l: usize) -> &LevelConnectivity {
        &self.levels[l]
    }

    pub fn levels(&self) -> &[LevelConnectivity] {
        &self.levels
    }

    pub fn finest(&self) -> &LevelConnectivity {
        self.levels.last().expect("at least the root level")
    }
}
