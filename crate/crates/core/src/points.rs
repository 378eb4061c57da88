//! Source and evaluation point sets.
//!
//! Both sets are stored as contiguous arrays (structure of arrays) so the
//! engine can permute them into tree order once per evaluation.

use crate::error::{FmmError, Result};
use crate::scalar::{cfinite, Scalar, C};

/// A single source: position `z` and (kernel dependent) strength `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourcePoint<T> {
    pub z: C<T>,
    pub m: C<T>,
}

/// A single evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint<T> {
    pub y: C<T>,
}

/// Sources with their strengths, plus optional per-source smoothing radii.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSet<T> {
    positions: Vec<C<T>>,
    strengths: Vec<C<T>>,
    cores: Option<Vec<T>>,
}

impl<T: Scalar> SourceSet<T> {
    pub fn new(positions: Vec<C<T>>, strengths: Vec<C<T>>) -> Result<Self> {
        if positions.len() != strengths.len() {
            return Err(FmmError::InvalidInput(format!(
                "{} source positions but {} strengths",
                positions.len(),
                strengths.len()
            )));
        }
        if let Some(i) = positions.iter().position(|z| !cfinite(*z)) {
            return Err(FmmError::InvalidInput(format!("source {i} has a non-finite position")));
        }
        if let Some(i) = strengths.iter().position(|m| !cfinite(*m)) {
            return Err(FmmError::InvalidInput(format!("source {i} has a non-finite strength")));
        }
        Ok(Self {
            positions,
            strengths,
            cores: None,
        })
    }

    /// Real strengths (masses, circulations) lifted to the complex plane.
    pub fn with_real_strengths(positions: Vec<C<T>>, strengths: &[T]) -> Result<Self> {
        let m = strengths.iter().map(|&s| C::new(s, T::zero())).collect();
        Self::new(positions, m)
    }

    /// Attach per-source smoothing radii. They replace the engine's global
    /// smoothing radius for near-field terms involving that source.
    pub fn with_cores(mut self, cores: Vec<T>) -> Result<Self> {
        if cores.len() != self.positions.len() {
            return Err(FmmError::InvalidInput(format!(
                "{} core radii for {} sources",
                cores.len(),
                self.positions.len()
            )));
        }
        if cores.iter().any(|c| !c.is_finite() || *c <= T::zero()) {
            return Err(FmmError::InvalidInput("core radii must be finite and positive".into()));
        }
        self.cores = Some(cores);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[C<T>] {
        &self.positions
    }

    pub fn strengths(&self) -> &[C<T>] {
        &self.strengths
    }

    pub fn cores(&self) -> Option<&[T]> {
        self.cores.as_deref()
    }

    pub fn point(&self, i: usize) -> SourcePoint<T> {
        SourcePoint {
            z: self.positions[i],
            m: self.strengths[i],
        }
    }

    /// Same positions, strengths multiplied by `alpha`.
    pub fn scaled(&self, alpha: C<T>) -> Self {
        Self {
            positions: self.positions.clone(),
            strengths: self.strengths.iter().map(|m| *m * alpha).collect(),
            cores: self.cores.clone(),
        }
    }
}

impl<T: Scalar> FromIterator<SourcePoint<T>> for SourceSet<T> {
    fn from_iter<I: IntoIterator<Item = SourcePoint<T>>>(iter: I) -> Self {
        let (positions, strengths) = iter.into_iter().map(|p| (p.z, p.m)).unzip();
        Self {
            positions,
            strengths,
            cores: None,
        }
    }
}

/// Points at which the field is evaluated.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalSet<T> {
    positions: Vec<C<T>>,
}

impl<T: Scalar> EvalSet<T> {
    pub fn new(positions: Vec<C<T>>) -> Result<Self> {
        if let Some(i) = positions.iter().position(|z| !cfinite(*z)) {
            return Err(FmmError::InvalidInput(format!(
                "evaluation point {i} has a non-finite position"
            )));
        }
        Ok(Self { positions })
    }

    /// Evaluate at the source positions themselves (self-interactions skipped).
    pub fn at_sources(sources: &SourceSet<T>) -> Self {
        Self {
            positions: sources.positions.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[C<T>] {
        &self.positions
    }
}

impl<T: Scalar> FromIterator<EvalPoint<T>> for EvalSet<T> {
    fn from_iter<I: IntoIterator<Item = EvalPoint<T>>>(iter: I) -> Self {
        Self {
            positions: iter.into_iter().map(|p| p.y).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatched_lengths() {
        let r = SourceSet::<f64>::new(vec![C::new(0.0, 0.0)], vec![]);
        assert!(matches!(r, Err(FmmError::InvalidInput(_))));
    }

    #[test]
    fn rejects_non_finite() {
        let r = SourceSet::new(vec![C::new(f64::NAN, 0.0)], vec![C::new(1.0, 0.0)]);
        assert!(r.is_err());
        let r = SourceSet::new(vec![C::new(0.0, 0.0)], vec![C::new(f64::INFINITY, 0.0)]);
        assert!(r.is_err());
        assert!(EvalSet::new(vec![C::new(0.0, f64::NAN)]).is_err());
    }

    #[test]
    fn cores_must_be_positive() {
        let s = SourceSet::new(vec![C::new(0.0, 0.0)], vec![C::new(1.0, 0.0)]).unwrap();
        assert!(s.clone().with_cores(vec![0.0]).is_err());
        assert!(s.with_cores(vec![0.1]).is_ok());
    }
}
