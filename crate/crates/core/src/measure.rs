// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Distribution functions and nonincreasing rearrangements.
//!
//! For a function `f` the distribution function is `f_*(τ) = μ{|f| > τ}` and
//! the rearrangement is `f^*(t) = inf{τ > 0 : f_*(τ) <= t}`. Both are computed
//! exactly for [`PiecewiseConstantFn`], and bracketed from below and above for
//! even functions described by a [`GridEnclosure`].
//!
//! Intervals are half-open `[lo, hi)` throughout. Rearrangements are
//! right-continuous step functions that vanish past their last breakpoint.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::exec::Exec;

/// Half-open interval `[lo, hi)`. `hi` may be `+inf` only where documented.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
        {
            return Err(LabError::Validation(format!("bad interval [{lo}, {hi})")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi && !self.is_empty() && !other.is_empty()
    }

    pub fn covers(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

/// One constant piece: an axis-aligned box and the value taken on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub cell: Vec<Interval>,
    pub value: f64,
}

impl Piece {
    pub fn measure(&self) -> f64 {
        self.cell.iter().map(Interval::len).product()
    }
}

/// A finite sum `Σ v_i χ_{B_i}` over pairwise disjoint boxes `B_i` in `R^d`.
///
/// Construction canonicalises: zero values and empty boxes are dropped,
/// pieces are sorted by their lower corner, and in `d = 1` adjacent pieces
/// with equal value are merged. Two canonical functions are equal as
/// functions iff they compare equal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantFn {
    dim: usize,
    pieces: Vec<Piece>,
}

impl PiecewiseConstantFn {
    /// One-dimensional function from `(interval, value)` pairs.
    pub fn new(pieces: Vec<(Interval, f64)>) -> Result<Self> {
        Self::from_boxes(
            1,
            pieces
                .into_iter()
                .map(|(iv, v)| (vec![iv], v))
                .collect(),
        )
    }

    pub fn from_boxes(dim: usize, pieces: Vec<(Vec<Interval>, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::domain("dim", "dimension must be positive"));
        }
        let mut kept = Vec::with_capacity(pieces.len());
        for (cell, value) in pieces {
            if cell.len() != dim {
                return Err(LabError::Validation(format!(
                    "box has {} sides, expected {dim}",
                    cell.len()
                )));
            }
            if !value.is_finite() {
                return Err(LabError::Validation(format!("non-finite value {value}")));
            }
            for iv in &cell {
                if !(iv.lo.is_finite() && iv.hi.is_finite()) || iv.lo > iv.hi {
                    return Err(LabError::Validation(format!(
                        "box side [{}, {}) must be finite and ordered",
                        iv.lo, iv.hi
                    )));
                }
            }
            if value == 0.0 || cell.iter().any(Interval::is_empty) {
                continue;
            }
            kept.push(Piece { cell, value });
        }
        kept.sort_by(|a, b| {
            a.cell
                .iter()
                .zip(&b.cell)
                .map(|(x, y)| x.lo.total_cmp(&y.lo))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });

        if dim == 1 {
            let mut merged: Vec<Piece> = Vec::with_capacity(kept.len());
            for piece in kept {
                if let Some(last) = merged.last_mut() {
                    let (prev, next) = (last.cell[0], piece.cell[0]);
                    if next.lo < prev.hi {
                        return Err(LabError::Validation(format!(
                            "pieces [{}, {}) and [{}, {}) overlap",
                            prev.lo, prev.hi, next.lo, next.hi
                        )));
                    }
                    if next.lo == prev.hi && piece.value == last.value {
                        last.cell[0].hi = next.hi;
                        continue;
                    }
                }
                merged.push(piece);
            }
            kept = merged;
        } else {
            for i in 0..kept.len() {
                for j in i + 1..kept.len() {
                    let disjoint = kept[i]
                        .cell
                        .iter()
                        .zip(&kept[j].cell)
                        .any(|(a, b)| !a.overlaps(b));
                    if !disjoint {
                        return Err(LabError::Validation(format!(
                            "boxes {i} and {j} overlap"
                        )));
                    }
                }
            }
        }
        Ok(PiecewiseConstantFn { dim, pieces: kept })
    }

    pub fn zero(dim: usize) -> Self {
        PiecewiseConstantFn {
            dim: dim.max(1),
            pieces: Vec::new(),
        }
    }

    /// `c · χ_I` in one dimension.
    pub fn indicator(interval: Interval, c: f64) -> Result<Self> {
        Self::new(vec![(interval, c)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Measure of the support.
    pub fn support_measure(&self) -> f64 {
        self.pieces.iter().map(Piece::measure).sum()
    }

    /// Point evaluation in one dimension.
    pub fn eval(&self, x: f64) -> f64 {
        debug_assert_eq!(self.dim, 1);
        let idx = self.pieces.partition_point(|p| p.cell[0].hi <= x);
        match self.pieces.get(idx) {
            Some(p) if p.cell[0].contains(x) => p.value,
            _ => 0.0,
        }
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::from_boxes(
            self.dim,
            self.pieces
                .iter()
                .map(|p| (p.cell.clone(), p.value * c))
                .collect(),
        )
    }

    /// Pointwise sum of two one-dimensional functions.
    pub fn add(&self, other: &PiecewiseConstantFn) -> Result<Self> {
        if self.dim != 1 || other.dim != 1 {
            return Err(LabError::Unsupported(
                "pointwise sums are implemented for d = 1 only".into(),
            ));
        }
        let mut cuts: Vec<f64> = self
            .pieces
            .iter()
            .chain(&other.pieces)
            .flat_map(|p| [p.cell[0].lo, p.cell[0].hi])
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let pieces = cuts
            .windows(2)
            .map(|w| {
                let x = w[0];
                (Interval { lo: w[0], hi: w[1] }, self.eval(x) + other.eval(x))
            })
            .collect();
        Self::new(pieces)
    }

    /// `x ↦ f(c x)`.
    pub fn dilate(&self, c: f64) -> Result<Self> {
        dilate_pc(self, c)
    }
}

/// `μ{|f| > τ}`, exactly.
pub fn distribution_pc(f: &PiecewiseConstantFn, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(LabError::domain("tau", format!("must be > 0, got {tau}")));
    }
    Ok(f
        .pieces
        .iter()
        .filter(|p| p.value.abs() > tau)
        .map(Piece::measure)
        .sum())
}

/// Exact nonincreasing rearrangement: magnitudes sorted downwards with the
/// piece measures accumulated as breakpoints.
pub fn rearrange_pc(f: &PiecewiseConstantFn) -> StepRearrangement {
    let pairs = f
        .pieces
        .iter()
        .map(|p| (p.value.abs(), p.measure()))
        .collect();
    StepRearrangement::from_weighted(pairs, Exec::Sequential)
}

/// `x ↦ f(c x)` for `c > 0`; each box is divided by `c`.
pub fn dilate_pc(f: &PiecewiseConstantFn, c: f64) -> Result<PiecewiseConstantFn> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(LabError::domain("c", format!("dilation must be > 0, got {c}")));
    }
    PiecewiseConstantFn::from_boxes(
        f.dim,
        f.pieces
            .iter()
            .map(|p| {
                let cell = p
                    .cell
                    .iter()
                    .map(|iv| Interval {
                        lo: iv.lo / c,
                        hi: iv.hi / c,
                    })
                    .collect();
                (cell, p.value)
            })
            .collect(),
    )
}

/// Right-continuous nonincreasing step function on `(0, ∞)`:
/// value `values[k]` on `[breaks[k-1], breaks[k])` with `breaks[-1] = 0`,
/// and zero from the last breakpoint on.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepRearrangement {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepRearrangement {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() {
            return Err(LabError::Validation(
                "breaks and values differ in length".into(),
            ));
        }
        let mut prev_t = 0.0;
        let mut prev_v = f64::INFINITY;
        for (&t, &v) in breaks.iter().zip(&values) {
            if !(t.is_finite() && t > prev_t) {
                return Err(LabError::Validation(format!(
                    "breakpoints must increase strictly from 0, got {t} after {prev_t}"
                )));
            }
            if !(v.is_finite() && v >= 0.0 && v <= prev_v) {
                return Err(LabError::Validation(format!(
                    "values must be finite, nonnegative and nonincreasing, got {v} after {prev_v}"
                )));
            }
            prev_t = t;
            prev_v = v;
        }
        let pairs = breaks
            .iter()
            .scan(0.0, |t0, &t| {
                let w = t - *t0;
                *t0 = t;
                Some(w)
            })
            .zip(&values)
            .map(|(w, &v)| (v, w))
            .collect::<Vec<_>>();
        Ok(Self::from_sorted(pairs.into_iter()))
    }

    /// Rearrangement of a family of `(magnitude, measure)` layers with
    /// disjoint supports.
    pub fn from_weighted(mut pairs: Vec<(f64, f64)>, exec: Exec) -> Self {
        pairs.retain(|&(v, w)| v > 0.0 && w > 0.0);
        exec.sort_pairs_desc(&mut pairs);
        Self::from_sorted(pairs.into_iter())
    }

    fn from_sorted(pairs: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut breaks: Vec<f64> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut t = 0.0;
        for (v, w) in pairs {
            if !(v > 0.0 && w > 0.0) {
                continue;
            }
            t += w;
            match values.last() {
                Some(&last) if last == v => *breaks.last_mut().unwrap() = t,
                _ => {
                    breaks.push(t);
                    values.push(v);
                }
            }
        }
        StepRearrangement { breaks, values }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Measure of the support.
    pub fn total_measure(&self) -> f64 {
        self.breaks.last().copied().unwrap_or(0.0)
    }

    /// `(t_{k-1}, t_k, v_k)` for every step.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breaks
            .iter()
            .enumerate()
            .map(move |(k, &t1)| {
                let t0 = if k == 0 { 0.0 } else { self.breaks[k - 1] };
                (t0, t1, self.values[k])
            })
    }

    /// Value at `t >= 0` under the right-continuous convention.
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.breaks.partition_point(|&b| b <= t);
        self.values.get(k).copied().unwrap_or(0.0)
    }

    /// Distribution function of the step function itself.
    pub fn distribution(&self, tau: f64) -> f64 {
        let k = self.values.partition_point(|&v| v > tau);
        if k == 0 {
            0.0
        } else {
            self.breaks[k - 1]
        }
    }

    /// `s ↦ R(c s)`.
    pub fn scale_argument(&self, c: f64) -> Self {
        StepRearrangement {
            breaks: self.breaks.iter().map(|t| t / c).collect(),
            values: self.values.clone(),
        }
    }

    pub fn scale_values(&self, lambda: f64) -> Self {
        let lambda = lambda.abs();
        if lambda == 0.0 {
            return StepRearrangement::default();
        }
        StepRearrangement {
            breaks: self.breaks.clone(),
            values: self.values.iter().map(|v| v * lambda).collect(),
        }
    }
}

/// Bracketed description of an even function `f` on the line: a partition
/// `0 = x_0 < ... < x_n = X` of `[0, X]` with `lower_i <= |f| <= upper_i` on
/// `[x_i, x_{i+1})` (and on its mirror image), and `|f(x)| <= C/|x|` for
/// `|x| > X`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridEnclosure {
    nodes: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    tail: f64,
}

impl GridEnclosure {
    pub fn new(nodes: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>, tail: f64) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 {
            return Err(LabError::Validation(
                "partition must start at 0 and contain at least one cell".into(),
            ));
        }
        if lower.len() + 1 != nodes.len() || upper.len() + 1 != nodes.len() {
            return Err(LabError::Validation(
                "one (lower, upper) pair per cell is required".into(),
            ));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(LabError::Validation(
                "partition nodes must increase strictly".into(),
            ));
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
                return Err(LabError::Validation(format!(
                    "cell {i} has inconsistent bounds [{lo}, {hi}]"
                )));
            }
        }
        if !(tail >= 0.0 && tail.is_finite()) {
            return Err(LabError::Validation(format!("bad tail constant {tail}")));
        }
        Ok(GridEnclosure {
            nodes,
            lower,
            upper,
            tail,
        })
    }

    pub(crate) fn from_parts_unchecked(
        nodes: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        tail: f64,
    ) -> Self {
        debug_assert!(Self::new(nodes.clone(), lower.clone(), upper.clone(), tail).is_ok());
        GridEnclosure {
            nodes,
            lower,
            upper,
            tail,
        }
    }

    pub fn cutoff(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn cells(&self) -> usize {
        self.lower.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn tail_constant(&self) -> f64 {
        self.tail
    }

    /// Enclosure of `|f| χ_K` where `K` is the even set whose trace on
    /// `[0, ∞)` is the union of `keep`. Cells cut by the boundary of `K`
    /// keep their upper bound and lose their lower bound.
    pub fn restrict(&self, keep: &[Interval]) -> GridEnclosure {
        let n = self.cells();
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 0..n {
            let cell = Interval {
                lo: self.nodes[i],
                hi: self.nodes[i + 1],
            };
            if keep.iter().any(|k| k.covers(&cell)) {
                lower[i] = self.lower[i];
                upper[i] = self.upper[i];
            } else if keep.iter().any(|k| k.overlaps(&cell)) {
                upper[i] = self.upper[i];
            }
        }
        let beyond = Interval {
            lo: self.cutoff(),
            hi: f64::INFINITY,
        };
        let tail = if keep.iter().any(|k| k.overlaps(&beyond)) {
            self.tail
        } else {
            0.0
        };
        GridEnclosure {
            nodes: self.nodes.clone(),
            lower,
            upper,
            tail,
        }
    }

    pub fn rearrange(&self, exec: Exec) -> RearrangementEnclosure {
        rearrange_enclosure_with(self, exec)
    }
}

/// Lower and upper nonincreasing rearrangements bracketing `f^*`, with
/// `f^*(t) <= tail / t` for `t` past the last breakpoint of `upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct RearrangementEnclosure {
    pub lower: StepRearrangement,
    pub upper: StepRearrangement,
    pub tail: f64,
    pub tail_start: f64,
}

impl RearrangementEnclosure {
    pub fn upper_eval(&self, t: f64) -> f64 {
        if t >= self.tail_start && self.tail > 0.0 {
            self.tail / t
        } else {
            self.upper.eval(t)
        }
    }

    /// Exact rearrangement of an enclosure that pins the function down.
    pub fn exact(r: StepRearrangement) -> Self {
        RearrangementEnclosure {
            lower: r.clone(),
            tail_start: r.total_measure(),
            upper: r,
            tail: 0.0,
        }
    }
}

pub fn rearrange_enclosure(g: &GridEnclosure) -> RearrangementEnclosure {
    rearrange_enclosure_with(g, Exec::default())
}

/// Lower rearrangement from the per-cell lower bounds (the tail is ignored);
/// upper rearrangement from the per-cell upper bounds with the tail measure
/// `μ{C/|x| > τ, |x| > X}` folded in.
///
/// With `S` the upper distribution of the cells and `T(τ) = 2 max(0, C/τ - X)`
/// the tail distribution, the rearrangement of `S + T` is at most
/// `max(R_S(t), C/X)` on `[0, 2X)` and at most `2C/t` beyond, because
/// `S <= 2X` and `S + T <= 2C/τ` for `τ < C/X`.
pub fn rearrange_enclosure_with(g: &GridEnclosure, exec: Exec) -> RearrangementEnclosure {
    let n = g.cells();
    let widths = exec.map_range(n, |i| 2.0 * (g.nodes[i + 1] - g.nodes[i]));
    let lower_pairs = g.lower.iter().copied().zip(widths.iter().copied()).collect();
    let lower = StepRearrangement::from_weighted(lower_pairs, exec);

    if g.tail > 0.0 {
        let floor = g.tail / g.cutoff();
        let pairs = g
            .upper
            .iter()
            .zip(&widths)
            .map(|(&u, &w)| (u.max(floor), w))
            .collect();
        let mut upper = StepRearrangement::from_weighted(pairs, exec);
        // The last breakpoint must sit exactly at 2X for the tail regime.
        if let Some(last) = upper.breaks.last_mut() {
            *last = 2.0 * g.cutoff();
        }
        RearrangementEnclosure {
            lower,
            upper,
            tail: 2.0 * g.tail,
            tail_start: 2.0 * g.cutoff(),
        }
    } else {
        let pairs = g.upper.iter().copied().zip(widths).collect();
        let upper = StepRearrangement::from_weighted(pairs, exec);
        RearrangementEnclosure {
            lower,
            tail_start: upper.total_measure(),
            upper,
            tail: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn two_step() -> PiecewiseConstantFn {
        PiecewiseConstantFn::new(vec![(iv(0.0, 3.0), 1.0), (iv(5.0, 6.0), 2.0)]).unwrap()
    }

    #[test]
    fn distribution_examples() {
        let f = two_step();
        assert_eq!(distribution_pc(&f, 1.5).unwrap(), 1.0);
        assert_eq!(distribution_pc(&f, 0.5).unwrap(), 4.0);
        assert!(distribution_pc(&f, 0.0).is_err());
        assert!(distribution_pc(&f, -1.0).is_err());
    }

    #[test]
    fn disjoint_sum_distribution() {
        let psi1 = PiecewiseConstantFn::indicator(iv(0.0, 1.0), 1.0).unwrap();
        let psi2 = PiecewiseConstantFn::indicator(iv(2.0, 3.0), 3.0).unwrap();
        let sum = psi1.add(&psi2).unwrap();
        let lhs = distribution_pc(&sum, 2.0).unwrap();
        let rhs = distribution_pc(&psi1, 2.0).unwrap() + distribution_pc(&psi2, 2.0).unwrap();
        assert_eq!(lhs, 1.0);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn rearrangement_examples() {
        let r = rearrange_pc(&two_step());
        assert_eq!(r.breaks(), &[1.0, 4.0]);
        assert_eq!(r.values(), &[2.0, 1.0]);
        assert!(rearrange_pc(&PiecewiseConstantFn::zero(1)).is_empty());
        let ind = PiecewiseConstantFn::indicator(iv(-1.5, 1.0), 0.7).unwrap();
        let r = rearrange_pc(&ind);
        assert_eq!(r.breaks(), &[2.5]);
        assert_eq!(r.values(), &[0.7]);
    }

    #[test]
    fn canonical_merge_and_overlap() {
        let f = PiecewiseConstantFn::new(vec![
            (iv(1.0, 2.0), 3.0),
            (iv(0.0, 1.0), 3.0),
            (iv(4.0, 4.0), 9.0),
            (iv(2.0, 5.0), 0.0),
        ])
        .unwrap();
        assert_eq!(f.pieces().len(), 1);
        assert_eq!(f.pieces()[0].cell[0], iv(0.0, 2.0));
        assert!(PiecewiseConstantFn::new(vec![(iv(0.0, 2.0), 1.0), (iv(1.0, 3.0), 2.0)]).is_err());
    }

    #[test]
    fn dilation_examples() {
        let f = PiecewiseConstantFn::indicator(iv(0.0, 4.0), 1.0).unwrap();
        let g = dilate_pc(&f, 2.0).unwrap();
        assert_eq!(g, PiecewiseConstantFn::indicator(iv(0.0, 2.0), 1.0).unwrap());
        assert_eq!(rearrange_pc(&g), rearrange_pc(&f).scale_argument(2.0));
        assert_eq!(dilate_pc(&f, 1.0).unwrap(), f);
        assert!(dilate_pc(&f, 0.0).is_err());
        assert!(dilate_pc(&f, -2.0).is_err());

        let sq = PiecewiseConstantFn::from_boxes(2, vec![(vec![iv(0.0, 1.0), iv(0.0, 1.0)], 1.0)])
            .unwrap();
        let d = dilate_pc(&sq, 2.0).unwrap();
        assert_eq!(d.pieces()[0].cell, vec![iv(0.0, 0.5), iv(0.0, 0.5)]);
        let r = rearrange_pc(&d);
        assert_eq!(r.breaks(), &[0.25]);
        assert_eq!(r, rearrange_pc(&sq).scale_argument(4.0));
    }

    #[test]
    fn overlapping_boxes_rejected() {
        let res = PiecewiseConstantFn::from_boxes(
            2,
            vec![
                (vec![iv(0.0, 1.0), iv(0.0, 1.0)], 1.0),
                (vec![iv(0.5, 2.0), iv(0.5, 2.0)], 1.0),
            ],
        );
        assert!(res.is_err());
    }

    #[test]
    fn step_rearrangement_eval_is_right_continuous() {
        let r = StepRearrangement::new(vec![1.0, 4.0], vec![2.0, 1.0]).unwrap();
        assert_eq!(r.eval(0.0), 2.0);
        assert_eq!(r.eval(0.999), 2.0);
        assert_eq!(r.eval(1.0), 1.0);
        assert_eq!(r.eval(4.0), 0.0);
        assert_eq!(r.distribution(1.5), 1.0);
        assert_eq!(r.distribution(0.5), 4.0);
        assert_eq!(r.distribution(2.0), 0.0);
        assert!(StepRearrangement::new(vec![1.0, 4.0], vec![1.0, 2.0]).is_err());
        assert!(StepRearrangement::new(vec![1.0, 1.0], vec![2.0, 1.0]).is_err());
    }

    #[test]
    fn degenerate_enclosure_matches_exact_rearrangement() {
        // |f| = 2 on [0,1), 1 on [1,3) of the half line, mirrored.
        let g = GridEnclosure::new(vec![0.0, 1.0, 3.0], vec![2.0, 1.0], vec![2.0, 1.0], 0.0)
            .unwrap();
        let enc = rearrange_enclosure(&g);
        let f = PiecewiseConstantFn::new(vec![
            (iv(-3.0, -1.0), 1.0),
            (iv(-1.0, 1.0), 2.0),
            (iv(1.0, 3.0), 1.0),
        ])
        .unwrap();
        assert_eq!(enc.lower, rearrange_pc(&f));
        assert_eq!(enc.upper, rearrange_pc(&f));
        assert_eq!(enc.tail, 0.0);
    }

    #[test]
    fn enclosure_validation() {
        assert!(GridEnclosure::new(vec![0.0, 1.0], vec![2.0], vec![1.0], 0.0).is_err());
        assert!(GridEnclosure::new(vec![0.5, 1.0], vec![0.0], vec![1.0], 0.0).is_err());
        assert!(GridEnclosure::new(vec![0.0, 1.0], vec![-0.1], vec![1.0], 0.0).is_err());
        assert!(GridEnclosure::new(vec![0.0, 1.0, 1.0], vec![0.0; 2], vec![1.0; 2], 0.0).is_err());
        assert!(GridEnclosure::new(vec![0.0, 1.0], vec![0.0], vec![1.0], -1.0).is_err());
    }

    #[test]
    fn tail_folding_gives_floor_and_hyperbola() {
        let g = GridEnclosure::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.0], vec![1.0, 0.1], 0.5)
            .unwrap();
        let enc = rearrange_enclosure(&g);
        // floor C/X = 0.25 lifts the second cell; tail 2C/t from t = 4.
        assert_eq!(enc.upper.values(), &[1.0, 0.25]);
        assert_eq!(enc.upper.breaks(), &[2.0, 4.0]);
        assert_eq!(enc.tail, 1.0);
        assert_eq!(enc.upper_eval(8.0), 0.125);
        assert_eq!(enc.lower.breaks(), &[2.0]);
    }

    #[test]
    fn restrict_is_conservative_on_cut_cells() {
        let g = GridEnclosure::new(
            vec![0.0, 1.0, 2.0, 3.0],
            vec![0.5, 0.5, 0.5],
            vec![1.0, 1.0, 1.0],
            0.3,
        )
        .unwrap();
        let r = g.restrict(&[iv(0.5, 2.0)]);
        assert_eq!(r.lower(), &[0.0, 0.5, 0.0]);
        assert_eq!(r.upper(), &[1.0, 1.0, 0.0]);
        assert_eq!(r.tail_constant(), 0.0);
        let off = g.restrict(&[iv(0.0, 1.0), iv(2.0, f64::INFINITY)]);
        assert_eq!(off.lower(), &[0.5, 0.0, 0.5]);
        assert_eq!(off.tail_constant(), 0.3);
    }
}
