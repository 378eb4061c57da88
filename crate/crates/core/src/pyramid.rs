//! Balanced quad-tree ("pyramid") built by repeated median splits.
//!
//! Every box is split into four children: first at the median of its source
//! x-coordinates, then each half at the median of its y-coordinates. Odd
//! counts put the extra point in the lower half, and ties on a coordinate are
//! broken by the original input index. Evaluation points follow the same split
//! lines but do not influence where they are placed. After splitting, every
//! child is shrunk to the tight bounding box of the points it holds.

use std::cmp::Ordering;
use std::ops::Range;

use rayon::prelude::*;

use crate::error::{FmmError, Result};
use crate::points::{EvalSet, SourceSet};
use crate::scalar::{Scalar, C};

/// One box of the pyramid.
#[derive(Debug, Clone, PartialEq)]
pub struct MBox<T> {
    pub center: C<T>,
    pub half_width: T,
    pub half_height: T,
    /// Half diagonal of the rectangle.
    pub radius: T,
    pub level: usize,
    pub index_in_level: usize,
    /// Range into the tree-ordered source array.
    pub point_range: Range<usize>,
    /// Range into the tree-ordered evaluation array.
    pub eval_range: Range<usize>,
}

impl<T: Scalar> MBox<T> {
    pub fn n_sources(&self) -> usize {
        self.point_range.len()
    }

    pub fn n_evals(&self) -> usize {
        self.eval_range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.point_range.is_empty() && self.eval_range.is_empty()
    }

    /// True if `z` lies in the closed rectangle.
    pub fn contains(&self, z: C<T>) -> bool {
        let d = z - self.center;
        let slack = T::of(1e-12) * (T::one() + self.radius + self.center.norm());
        d.re.abs() <= self.half_width + slack && d.im.abs() <= self.half_height + slack
    }
}

/// Number of boxes at the finest level of an `n_levels` pyramid.
pub fn finest_box_count(n_levels: usize) -> usize {
    1usize << (2 * (n_levels - 1))
}

/// The balanced tree: level `l` holds exactly `4^l` boxes and the children of
/// box `i` are `4i..4i+4` on the next level.
#[derive(Debug, Clone)]
pub struct Pyramid<T> {
    n_levels: usize,
    levels: Vec<Vec<MBox<T>>>,
    permutation: Vec<usize>,
    eval_permutation: Vec<usize>,
}

#[derive(Clone, Copy)]
struct Rect<T> {
    xmin: T,
    xmax: T,
    ymin: T,
    ymax: T,
}

impl<T: Scalar> Rect<T> {
    fn empty() -> Self {
        Rect {
            xmin: T::infinity(),
            xmax: T::neg_infinity(),
            ymin: T::infinity(),
            ymax: T::neg_infinity(),
        }
    }

    fn grow(&mut self, z: C<T>) {
        self.xmin = self.xmin.min(z.re);
        self.xmax = self.xmax.max(z.re);
        self.ymin = self.ymin.min(z.im);
        self.ymax = self.ymax.max(z.im);
    }

    fn is_empty(&self) -> bool {
        self.xmin > self.xmax
    }

    fn center(&self) -> C<T> {
        let two = T::of(2.0);
        C::new((self.xmin + self.xmax) / two, (self.ymin + self.ymax) / two)
    }
}

fn make_box<T: Scalar>(
    tight: Rect<T>,
    cell: Rect<T>,
    level: usize,
    index_in_level: usize,
    point_range: Range<usize>,
    eval_range: Range<usize>,
) -> MBox<T> {
    let two = T::of(2.0);
    let (center, half_width, half_height) = if tight.is_empty() {
        (cell.center(), T::zero(), T::zero())
    } else {
        (
            tight.center(),
            (tight.xmax - tight.xmin) / two,
            (tight.ymax - tight.ymin) / two,
        )
    };
    MBox {
        center,
        half_width,
        half_height,
        radius: half_width.hypot(half_height),
        level,
        index_in_level,
        point_range,
        eval_range,
    }
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

#[inline]
fn coord<T: Scalar>(z: C<T>, axis: Axis) -> T {
    match axis {
        Axis::X => z.re,
        Axis::Y => z.im,
    }
}

/// Median split of `idx` along `axis`. Returns the number of points in the
/// lower half and the split coordinate used for evaluation points.
fn split_sources<T: Scalar>(
    idx: &mut [usize],
    pos: &[C<T>],
    axis: Axis,
    fallback: T,
) -> (usize, T) {
    let n = idx.len();
    let lower = n.div_ceil(2);
    if n == 0 {
        return (0, fallback);
    }
    let key = |i: &usize, j: &usize| {
        coord(pos[*i], axis)
            .partial_cmp(&coord(pos[*j], axis))
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(j))
    };
    if lower < n {
        idx.select_nth_unstable_by(lower, key);
    }
    let lower_max = idx[..lower]
        .iter()
        .map(|&i| coord(pos[i], axis))
        .fold(T::neg_infinity(), T::max);
    let split = if lower < n {
        let upper_min = coord(pos[idx[lower]], axis);
        (lower_max + upper_min) / T::of(2.0)
    } else {
        lower_max
    };
    (lower, split)
}

/// Stable partition of evaluation indices: coordinate `<= split` goes first.
fn split_evals<T: Scalar>(idx: &mut [usize], pos: &[C<T>], axis: Axis, split: T) -> usize {
    let (lo, hi): (Vec<usize>, Vec<usize>) =
        idx.iter().partition(|&&i| coord(pos[i], axis) <= split);
    let n_lo = lo.len();
    idx[..n_lo].copy_from_slice(&lo);
    idx[n_lo..].copy_from_slice(&hi);
    n_lo
}

fn tight_rect<T: Scalar>(src: &[usize], spos: &[C<T>], ev: &[usize], epos: &[C<T>]) -> Rect<T> {
    let mut r = Rect::empty();
    for &i in src {
        r.grow(spos[i]);
    }
    for &i in ev {
        r.grow(epos[i]);
    }
    r
}

struct SplitJob<'a, T> {
    parent: &'a MBox<T>,
    src: &'a mut [usize],
    ev: &'a mut [usize],
}

fn split_box<T: Scalar>(job: SplitJob<'_, T>, spos: &[C<T>], epos: &[C<T>]) -> [MBox<T>; 4] {
    let SplitJob { parent, src, ev } = job;
    let src_base = parent.point_range.start;
    let ev_base = parent.eval_range.start;
    let level = parent.level + 1;

    let cell = Rect {
        xmin: parent.center.re - parent.half_width,
        xmax: parent.center.re + parent.half_width,
        ymin: parent.center.im - parent.half_height,
        ymax: parent.center.im + parent.half_height,
    };

    let (nx_lo, split_x) = split_sources(src, spos, Axis::X, parent.center.re);
    let ex_lo = split_evals(ev, epos, Axis::X, split_x);

    let mut out: Vec<MBox<T>> = Vec::with_capacity(4);
    let (src_lo, src_hi) = src.split_at_mut(nx_lo);
    let (ev_lo, ev_hi) = ev.split_at_mut(ex_lo);
    let halves = [
        (src_lo, ev_lo, 0usize, 0usize, cell.xmin, split_x.min(cell.xmax)),
        (src_hi, ev_hi, nx_lo, ex_lo, split_x.max(cell.xmin), cell.xmax),
    ];
    for (xhalf, (s, e, s_off, e_off, x0, x1)) in halves.into_iter().enumerate() {
        let half_cell = Rect {
            xmin: x0,
            xmax: x1,
            ymin: cell.ymin,
            ymax: cell.ymax,
        };
        let (ny_lo, split_y) = split_sources(s, spos, Axis::Y, half_cell.center().im);
        let ey_lo = split_evals(e, epos, Axis::Y, split_y);
        let (s_lo, s_hi) = s.split_at(ny_lo);
        let (e_lo, e_hi) = e.split_at(ey_lo);
        let quads = [
            (s_lo, e_lo, 0usize, 0usize, cell.ymin, split_y.min(cell.ymax)),
            (s_hi, e_hi, ny_lo, ey_lo, split_y.max(cell.ymin), cell.ymax),
        ];
        for (yhalf, (qs, qe, qs_off, qe_off, y0, y1)) in quads.into_iter().enumerate() {
            let child_cell = Rect {
                xmin: x0,
                xmax: x1,
                ymin: y0,
                ymax: y1,
            };
            let start_s = src_base + s_off + qs_off;
            let start_e = ev_base + e_off + qe_off;
            out.push(make_box(
                tight_rect(qs, spos, qe, epos),
                child_cell,
                level,
                4 * parent.index_in_level + 2 * xhalf + yhalf,
                start_s..start_s + qs.len(),
                start_e..start_e + qe.len(),
            ));
        }
    }
    out.try_into().expect("exactly four children")
}

impl<T: Scalar> Pyramid<T> {
    /// Build an `n_levels` pyramid over `sources`, partitioning `evals`
    /// against the same split lines. Runs data-parallel on the current rayon
    /// pool.
    pub fn build(sources: &SourceSet<T>, evals: &EvalSet<T>, n_levels: usize) -> Result<Self> {
        if n_levels < 1 {
            return Err(FmmError::param("n_levels", "must be at least 1"));
        }
        if n_levels > 16 {
            return Err(FmmError::param("n_levels", format!("{n_levels} levels exceed the supported depth of 16")));
        }
        if sources.is_empty() {
            return Err(FmmError::InvalidInput("source set is empty".into()));
        }
        let spos = sources.positions();
        let epos = evals.positions();
        let mut permutation: Vec<usize> = (0..spos.len()).collect();
        let mut eval_permutation: Vec<usize> = (0..epos.len()).collect();

        let root_rect = tight_rect(&permutation, spos, &eval_permutation, epos);
        let root = make_box(root_rect, root_rect, 0, 0, 0..spos.len(), 0..epos.len());
        let mut levels = vec![vec![root]];

        for _ in 1..n_levels {
            let parents = levels.last().expect("root level exists");
            let jobs = {
                let mut jobs = Vec::with_capacity(parents.len());
                let mut src_rest: &mut [usize] = &mut permutation;
                let mut ev_rest: &mut [usize] = &mut eval_permutation;
                for parent in parents {
                    let (s, sr) = std::mem::take(&mut src_rest).split_at_mut(parent.n_sources());
                    let (e, er) = std::mem::take(&mut ev_rest).split_at_mut(parent.n_evals());
                    src_rest = sr;
                    ev_rest = er;
                    jobs.push(SplitJob { parent, src: s, ev: e });
                }
                jobs
            };
            let children: Vec<[MBox<T>; 4]> = jobs
                .into_par_iter()
                .with_min_len(16)
                .map(|job| split_box(job, spos, epos))
                .collect();
            levels.push(children.into_iter().flatten().collect());
        }

        Ok(Self {
            n_levels,
            levels,
            permutation,
            eval_permutation,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn level(&self, l: usize) -> &[MBox<T>] {
        &self.levels[l]
    }

    pub fn levels(&self) -> &[Vec<MBox<T>>] {
        &self.levels
    }

    pub fn finest(&self) -> &[MBox<T>] {
        &self.levels[self.n_levels - 1]
    }

    /// `permutation[k]` is the input index of the `k`-th source in tree order.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn eval_permutation(&self) -> &[usize] {
        &self.eval_permutation
    }

    /// Input indices of the sources held by `b`.
    pub fn sources_in(&self, b: &MBox<T>) -> &[usize] {
        &self.permutation[b.point_range.clone()]
    }

    pub fn evals_in(&self, b: &MBox<T>) -> &[usize] {
        &self.eval_permutation[b.eval_range.clone()]
    }

    /// Finest-level box index holding each input source.
    pub fn finest_box_of_sources(&self) -> Vec<usize> {
        let mut out = vec![0; self.permutation.len()];
        for b in self.finest() {
            for &i in self.sources_in(b) {
                out[i] = b.index_in_level;
            }
        }
        out
    }

    /// Largest over smallest radius of the finest boxes holding sources.
    pub fn radius_spread(&self) -> T {
        let (lo, hi) = self
            .finest()
            .iter()
            .filter(|b| b.n_sources() > 0)
            .fold((T::infinity(), T::zero()), |(lo, hi), b| {
                (lo.min(b.radius), hi.max(b.radius))
            });
        if lo <= T::zero() {
            T::infinity()
        } else {
            hi / lo
        }
    }
}
