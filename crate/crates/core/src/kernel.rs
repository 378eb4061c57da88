//! Interaction kernels, near-field smoothing and direct (P2P) summation.

use crate::error::{FmmError, Result};
use crate::points::{EvalSet, SourceSet};
use crate::scalar::{Scalar, C};

/// Pairwise interaction `G(y, x)` for a source of strength `m` at `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// `G = -m / (y - x)`.
    Harmonic,
    /// `G = m log(y - x)` (principal branch; potentials read the real part).
    Logarithmic,
}

impl Kernel {
    #[inline]
    pub fn eval<T: Scalar>(self, y: C<T>, x: C<T>, m: C<T>) -> C<T> {
        let d = y - x;
        match self {
            Kernel::Harmonic => -m * d.conj() / d.norm_sqr(),
            Kernel::Logarithmic => m * d.ln(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Harmonic => "harmonic",
            Kernel::Logarithmic => "log",
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "harmonic" => Ok(Kernel::Harmonic),
            "log" | "logarithmic" => Ok(Kernel::Logarithmic),
            other => Err(format!("unknown kernel `{other}` (expected harmonic or log)")),
        }
    }
}

/// Gaussian smoother `g(r) = 1 - exp(-r^2 / delta^2)`.
pub fn gaussian_smoother<T: Scalar>(r: T, delta: T) -> Result<T> {
    if !(delta > T::zero()) {
        return Err(FmmError::param("delta", "smoothing radius must be positive"));
    }
    if r < T::zero() {
        return Err(FmmError::param("r", "distance must be non-negative"));
    }
    Ok(T::one() - (-(r * r) / (delta * delta)).exp())
}

/// Near-field regularisation applied multiplicatively to each P2P term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoother<T> {
    /// `1 - exp(-r^2/δ^2)`, used by the vortex methods.
    Gaussian { delta: T },
    /// `r / sqrt(δ^2 + r^2)`, turning `1/r` into `1/sqrt(δ^2 + r^2)`.
    Plummer { delta: T },
}

impl<T: Scalar> Smoother<T> {
    pub fn delta(&self) -> T {
        match *self {
            Smoother::Gaussian { delta } | Smoother::Plummer { delta } => delta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.delta();
        if d > T::zero() && d.is_finite() {
            Ok(())
        } else {
            Err(FmmError::param("smoother_delta", format!("{d} is not a positive finite radius")))
        }
    }

    /// Smoothing factor at squared distance `r2` with radius `delta`.
    #[inline]
    pub fn factor(&self, r2: T, delta: T) -> T {
        match self {
            Smoother::Gaussian { .. } => T::one() - (-r2 / (delta * delta)).exp(),
            Smoother::Plummer { .. } => (r2 / (delta * delta + r2)).sqrt(),
        }
    }

    /// Separation beyond which the factor equals one to within `0.01 * tol`,
    /// if the factor approaches one fast enough for that to be useful.
    pub fn far_field_gap(&self, tol: T, max_delta: T) -> Option<T> {
        match self {
            Smoother::Gaussian { .. } => Some(max_delta * (T::of(100.0) / tol).ln().sqrt()),
            Smoother::Plummer { .. } => None,
        }
    }

    pub fn with_delta(&self, delta: T) -> Self {
        match self {
            Smoother::Gaussian { .. } => Smoother::Gaussian { delta },
            Smoother::Plummer { .. } => Smoother::Plummer { delta },
        }
    }
}

/// Accumulate the direct contribution of `(src_pos, src_m)` into `out` at
/// `targets`. Pairs at identical positions are skipped. `cores` overrides
/// the smoother radius per source.
#[allow(clippy::too_many_arguments)]
#[inline]
pub fn p2p_accumulate<T: Scalar>(
    kernel: Kernel,
    smoother: Option<&Smoother<T>>,
    targets: &[C<T>],
    src_pos: &[C<T>],
    src_m: &[C<T>],
    cores: Option<&[T]>,
    out: &mut [C<T>],
) {
    debug_assert_eq!(targets.len(), out.len());
    let zero = T::zero();
    for (y, acc) in targets.iter().zip(out.iter_mut()) {
        let mut sum = C::new(zero, zero);
        match (kernel, smoother) {
            (Kernel::Harmonic, None) => {
                for (x, m) in src_pos.iter().zip(src_m) {
                    let d = *y - *x;
                    let r2 = d.norm_sqr();
                    if r2 == zero {
                        continue;
                    }
                    sum -= *m * d.conj() / r2;
                }
            }
            (Kernel::Harmonic, Some(s)) => {
                let delta = s.delta();
                for (j, (x, m)) in src_pos.iter().zip(src_m).enumerate() {
                    let d = *y - *x;
                    let r2 = d.norm_sqr();
                    if r2 == zero {
                        continue;
                    }
                    let dj = cores.map_or(delta, |c| c[j]);
                    sum -= *m * d.conj() * (s.factor(r2, dj) / r2);
                }
            }
            (Kernel::Logarithmic, sm) => {
                for (j, (x, m)) in src_pos.iter().zip(src_m).enumerate() {
                    let d = *y - *x;
                    let r2 = d.norm_sqr();
                    if r2 == zero {
                        continue;
                    }
                    let g = match sm {
                        Some(s) => s.factor(r2, cores.map_or(s.delta(), |c| c[j])),
                        None => T::one(),
                    };
                    sum += *m * d.ln() * g;
                }
            }
        }
        *acc += sum;
    }
}

/// One-directional direct summation of every source at every target.
pub fn p2p_direct<T: Scalar>(
    targets: &EvalSet<T>,
    sources: &SourceSet<T>,
    kernel: Kernel,
    smoother: Option<&Smoother<T>>,
) -> Result<Vec<C<T>>> {
    if let Some(s) = smoother {
        s.validate()?;
    }
    let mut out = vec![C::new(T::zero(), T::zero()); targets.len()];
    p2p_accumulate(
        kernel,
        smoother,
        targets.positions(),
        sources.positions(),
        sources.strengths(),
        sources.cores(),
        &mut out,
    );
    Ok(out)
}
