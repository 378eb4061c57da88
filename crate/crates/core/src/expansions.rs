//! Truncated multipole (outgoing) and local (ingoing) expansions and the
//! translation operators between them.
//!
//! Coefficient conventions, with `w = z_j - z_c` and `ζ = z - z_c`:
//!
//! * harmonic outgoing: `Φ(z) ≈ Σ_{k=0..p} b_k ζ^{-(k+1)}`, `b_k = -Σ m_j w^k`
//! * logarithmic outgoing: `Φ(z) ≈ a_0 log ζ + Σ_{k=1..p} a_k ζ^{-k}`,
//!   `a_0 = Σ m_j`, `a_k = -Σ m_j w^k / k`
//! * ingoing (both kernels): `Φ(z) ≈ Σ_{k=0..p} c_k ζ^k`
//!
//! M2M and L2L are exact at fixed `p`; only P2M truncation and M2L introduce
//! approximation error.

use crate::error::{FmmError, Result};
use crate::kernel::Kernel;
use crate::scalar::{Scalar, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionKind {
    Outgoing,
    Ingoing,
}

/// A coefficient vector of length `p + 1` anchored at `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion<T> {
    pub center: C<T>,
    pub kind: ExpansionKind,
    pub coeffs: Vec<C<T>>,
}

impl<T: Scalar> Expansion<T> {
    pub fn zero(center: C<T>, kind: ExpansionKind, p: usize) -> Self {
        Self {
            center,
            kind,
            coeffs: vec![C::new(T::zero(), T::zero()); p + 1],
        }
    }

    pub fn p(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Expansion operators for one kernel at a fixed truncation order.
#[derive(Debug, Clone)]
pub struct Operators<T> {
    kernel: Kernel,
    p: usize,
    /// Pascal triangle rows `0..=2p+1`.
    binom: Vec<Vec<T>>,
}

impl<T: Scalar> Operators<T> {
    pub fn new(kernel: Kernel, p: usize) -> Result<Self> {
        if p < 1 {
            return Err(FmmError::param("p", "expansion order must be at least 1"));
        }
        let rows = 2 * p + 2;
        let mut binom: Vec<Vec<T>> = Vec::with_capacity(rows);
        for n in 0..rows {
            let mut row = vec![T::one(); n + 1];
            for k in 1..n {
                row[k] = binom[n - 1][k - 1] + binom[n - 1][k];
            }
            binom.push(row);
        }
        Ok(Self { kernel, p, binom })
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_coeffs(&self) -> usize {
        self.p + 1
    }

    #[inline]
    fn c(&self, n: usize, k: usize) -> T {
        self.binom[n][k]
    }

    /// Accumulate the outgoing expansion of the given sources into `out`.
    pub fn p2m_into(&self, center: C<T>, pos: &[C<T>], m: &[C<T>], out: &mut [C<T>]) {
        debug_assert_eq!(out.len(), self.p + 1);
        match self.kernel {
            Kernel::Harmonic => {
                for (z, mj) in pos.iter().zip(m) {
                    let w = *z - center;
                    let mut term = -*mj;
                    for b in out.iter_mut() {
                        *b += term;
                        term *= w;
                    }
                }
            }
            Kernel::Logarithmic => {
                for (z, mj) in pos.iter().zip(m) {
                    let w = *z - center;
                    out[0] += *mj;
                    let mut pw = *mj;
                    for (k, a) in out.iter_mut().enumerate().skip(1) {
                        pw *= w;
                        *a -= pw / T::of(k as f64);
                    }
                }
            }
        }
    }

    /// Accumulate the translation of an outgoing expansion at `from` into an
    /// outgoing expansion at `to`.
    pub fn m2m_into(&self, child: &[C<T>], from: C<T>, to: C<T>, out: &mut [C<T>]) {
        let s = from - to;
        let p = self.p;
        let mut spow = Vec::with_capacity(p + 1);
        let mut acc = C::new(T::one(), T::zero());
        for _ in 0..=p {
            spow.push(acc);
            acc *= s;
        }
        match self.kernel {
            Kernel::Harmonic => {
                for l in 0..=p {
                    let mut sum = C::new(T::zero(), T::zero());
                    for k in 0..=l {
                        sum += child[k] * spow[l - k] * self.c(l, k);
                    }
                    out[l] += sum;
                }
            }
            Kernel::Logarithmic => {
                let a0 = child[0];
                out[0] += a0;
                for l in 1..=p {
                    let mut sum = -a0 * spow[l] / T::of(l as f64);
                    for k in 1..=l {
                        sum += child[k] * spow[l - k] * self.c(l - 1, k - 1);
                    }
                    out[l] += sum;
                }
            }
        }
    }

    /// Accumulate the local expansion at `to` of an outgoing expansion at
    /// `from`. The centers must differ.
    pub fn m2l_into(&self, outgoing: &[C<T>], from: C<T>, to: C<T>, out: &mut [C<T>]) {
        let t = to - from;
        debug_assert!(t.norm_sqr() > T::zero());
        let tinv = t.inv();
        let p = self.p;
        // Scaled outgoing coefficients u_k = b_k t^-k stay O(θ^k) for
        // well-separated boxes, avoiding overflow of raw powers of 1/t.
        let mut u = [C::new(T::zero(), T::zero()); 128];
        let mut u_heap;
        let u: &mut [C<T>] = if p < 128 {
            &mut u[..=p]
        } else {
            u_heap = vec![C::new(T::zero(), T::zero()); p + 1];
            &mut u_heap
        };
        let mut pw = C::new(T::one(), T::zero());
        for k in 0..=p {
            u[k] = outgoing[k] * pw;
            pw *= tinv;
        }
        match self.kernel {
            Kernel::Harmonic => {
                let mut scale = tinv;
                for l in 0..=p {
                    let row = &self.binom;
                    let mut sum = C::new(T::zero(), T::zero());
                    for k in 0..=p {
                        sum += u[k] * row[k + l][l];
                    }
                    out[l] += sum * scale;
                    scale = -scale * tinv;
                }
            }
            Kernel::Logarithmic => {
                let a0 = u[0];
                let mut c0 = a0 * t.ln();
                for uk in u.iter().skip(1) {
                    c0 += *uk;
                }
                out[0] += c0;
                let mut scale = -tinv;
                for l in 1..=p {
                    let mut sum = -a0 / T::of(l as f64);
                    for k in 1..=p {
                        sum += u[k] * self.c(k + l - 1, l);
                    }
                    out[l] += sum * scale;
                    scale = -scale * tinv;
                }
            }
        }
    }

    /// Overwrite `out` with the local expansion at `to` equal to `parent`
    /// (anchored at `from`). Exact polynomial re-centering.
    pub fn l2l_into(&self, parent: &[C<T>], from: C<T>, to: C<T>, out: &mut [C<T>]) {
        out.copy_from_slice(parent);
        let s = to - from;
        if s.norm_sqr() == T::zero() {
            return;
        }
        let p = self.p;
        for i in 0..p {
            for k in (i..p).rev() {
                let next = out[k + 1];
                out[k] += s * next;
            }
        }
    }

    /// Horner evaluation of a local expansion at `z`.
    #[inline]
    pub fn l2p_at(&self, local: &[C<T>], center: C<T>, z: C<T>) -> C<T> {
        let eta = z - center;
        local
            .iter()
            .rev()
            .fold(C::new(T::zero(), T::zero()), |acc, c| acc * eta + *c)
    }

    /// Evaluate an outgoing expansion at `z` (outside its box).
    pub fn eval_outgoing(&self, outgoing: &[C<T>], center: C<T>, z: C<T>) -> C<T> {
        let zeta = z - center;
        let inv = zeta.inv();
        match self.kernel {
            Kernel::Harmonic => {
                let mut pw = inv;
                let mut sum = C::new(T::zero(), T::zero());
                for b in outgoing {
                    sum += *b * pw;
                    pw *= inv;
                }
                sum
            }
            Kernel::Logarithmic => {
                let mut sum = outgoing[0] * zeta.ln();
                let mut pw = inv;
                for a in &outgoing[1..] {
                    sum += *a * pw;
                    pw *= inv;
                }
                sum
            }
        }
    }

    // Allocation-returning forms of the operators.

    pub fn p2m(&self, center: C<T>, pos: &[C<T>], m: &[C<T>]) -> Expansion<T> {
        let mut e = Expansion::zero(center, ExpansionKind::Outgoing, self.p);
        self.p2m_into(center, pos, m, &mut e.coeffs);
        e
    }

    pub fn m2m(&self, child: &Expansion<T>, new_center: C<T>) -> Result<Expansion<T>> {
        self.check(child, ExpansionKind::Outgoing)?;
        let mut e = Expansion::zero(new_center, ExpansionKind::Outgoing, self.p);
        self.m2m_into(&child.coeffs, child.center, new_center, &mut e.coeffs);
        Ok(e)
    }

    pub fn m2l(&self, outgoing: &Expansion<T>, target_center: C<T>) -> Result<Expansion<T>> {
        self.check(outgoing, ExpansionKind::Outgoing)?;
        if (target_center - outgoing.center).norm_sqr() == T::zero() {
            return Err(FmmError::SingularConfiguration(
                "M2L target center coincides with the source center".into(),
            ));
        }
        let mut e = Expansion::zero(target_center, ExpansionKind::Ingoing, self.p);
        self.m2l_into(&outgoing.coeffs, outgoing.center, target_center, &mut e.coeffs);
        Ok(e)
    }

    pub fn l2l(&self, local: &Expansion<T>, child_center: C<T>) -> Result<Expansion<T>> {
        self.check(local, ExpansionKind::Ingoing)?;
        let mut e = Expansion::zero(child_center, ExpansionKind::Ingoing, self.p);
        self.l2l_into(&local.coeffs, local.center, child_center, &mut e.coeffs);
        Ok(e)
    }

    pub fn l2p(&self, local: &Expansion<T>, evals: &[C<T>]) -> Result<Vec<C<T>>> {
        self.check(local, ExpansionKind::Ingoing)?;
        Ok(evals
            .iter()
            .map(|z| self.l2p_at(&local.coeffs, local.center, *z))
            .collect())
    }

    fn check(&self, e: &Expansion<T>, kind: ExpansionKind) -> Result<()> {
        if e.kind != kind {
            return Err(FmmError::InvalidInput(format!("expected {kind:?} expansion, got {:?}", e.kind)));
        }
        if e.coeffs.len() != self.p + 1 {
            return Err(FmmError::InvalidInput(format!(
                "expansion has {} coefficients, operators use p = {}",
                e.coeffs.len(),
                self.p
            )));
        }
        Ok(())
    }
}

/// Truncation orders for the harmonic kernel at sample tolerances (rows)
/// and θ values (columns).
pub const P_TABLE_TOLS: [f64; 3] = [1e-6, 1e-7, 1e-8];
pub const P_TABLE_THETAS: [f64; 5] = [0.35, 0.4, 0.5, 0.6, 0.65];
pub const P_TABLE: [[usize; 5]; 3] = [
    [11, 13, 17, 24, 28],
    [14, 16, 21, 28, 34],
    [16, 18, 24, 33, 39],
];

fn check_tol_theta(tol: f64, theta: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(FmmError::param("tol", format!("{tol} is outside (0, 1)")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(FmmError::param("theta", format!("{theta} is outside (0, 1)")));
    }
    Ok(())
}

/// `max(1, floor(calibration * ln(tol) / ln(theta)))`.
pub fn choose_p(tol: f64, theta: f64, calibration: f64) -> Result<usize> {
    check_tol_theta(tol, theta)?;
    if !(calibration > 0.0 && calibration.is_finite()) {
        return Err(FmmError::param("calibration", "must be positive"));
    }
    Ok(((calibration * tol.ln() / theta.ln()).floor() as usize).max(1))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs()
}

/// Exact lookup in the sample table.
pub fn table_p(tol: f64, theta: f64) -> Option<usize> {
    let row = P_TABLE_TOLS.iter().position(|&t| close(tol, t))?;
    let col = P_TABLE_THETAS.iter().position(|&t| close(theta, t))?;
    Some(P_TABLE[row][col])
}

/// Table lookup extended off the grid: the calibration implied by the table
/// cells is interpolated bilinearly in `(log10 tol, θ)` (clamped to the
/// table's range) and applied to the closed form, rounded up.
pub fn table_p_extended(tol: f64, theta: f64) -> Result<usize> {
    check_tol_theta(tol, theta)?;
    if let Some(p) = table_p(tol, theta) {
        return Ok(p);
    }
    let implied = |r: usize, c: usize| {
        P_TABLE[r][c] as f64 * P_TABLE_THETAS[c].ln() / P_TABLE_TOLS[r].ln()
    };
    let bracket = |grid: &[f64], x: f64| -> (usize, usize, f64) {
        let x = x.clamp(grid[0].min(grid[grid.len() - 1]), grid[0].max(grid[grid.len() - 1]));
        for i in 0..grid.len() - 1 {
            let (a, b) = (grid[i], grid[i + 1]);
            if (a <= x && x <= b) || (b <= x && x <= a) {
                return (i, i + 1, (x - a) / (b - a));
            }
        }
        (grid.len() - 1, grid.len() - 1, 0.0)
    };
    let log_tols: Vec<f64> = P_TABLE_TOLS.iter().map(|t| t.log10()).collect();
    let (r0, r1, fr) = bracket(&log_tols, tol.log10());
    let (c0, c1, fc) = bracket(&P_TABLE_THETAS, theta);
    let top = implied(r0, c0) * (1.0 - fc) + implied(r0, c1) * fc;
    let bottom = implied(r1, c0) * (1.0 - fc) + implied(r1, c1) * fc;
    let cal = top * (1.0 - fr) + bottom * fr;
    Ok(((cal * tol.ln() / theta.ln()).ceil() as usize).max(1))
}

/// How the truncation order follows from `(tol, θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PRule {
    Formula { calibration: f64 },
    Table,
    Fixed(usize),
}

impl Default for PRule {
    fn default() -> Self {
        PRule::Table
    }
}

impl PRule {
    pub fn resolve(&self, tol: f64, theta: f64) -> Result<usize> {
        match *self {
            PRule::Formula { calibration } => choose_p(tol, theta, calibration),
            PRule::Table => table_p_extended(tol, theta),
            PRule::Fixed(p) if p >= 1 => Ok(p),
            PRule::Fixed(_) => Err(FmmError::param("p", "fixed expansion order must be at least 1")),
        }
    }
}
