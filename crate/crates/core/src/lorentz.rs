// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Lorentz `(r, s)` norms
//! `‖f‖_{r,s} = (∫_0^∞ (t^{1/r} f^*(t))^s dt/t)^{1/s}`,
//! Lebesgue norms and sequence Lorentz norms.
//!
//! On a step of height `v` over `[t0, t1)` the integrand is `v^s t^{α-1}` with
//! `α = s/r`, so every integral here is a closed-form sum of
//! `v^s (t1^α - t0^α) / α`. Nothing is approximated by quadrature.

use serde::{Deserialize, Serialize};

use crate::bracket::Bracket;
use crate::error::{LabError, Result};
use crate::measure::{PiecewiseConstantFn, RearrangementEnclosure, StepRearrangement};

/// Lorentz indices `(r, s)` with `r > 0` and `s ∈ (0, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzIndex {
    pub r: f64,
    pub s: f64,
}

impl LorentzIndex {
    pub fn new(r: f64, s: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(LabError::domain("r", format!("must be in (0, inf), got {r}")));
        }
        if !(s > 0.0) {
            return Err(LabError::domain("s", format!("must be in (0, inf], got {s}")));
        }
        Ok(LorentzIndex { r, s })
    }

    /// `(p', p)`, the target indices of the Fourier transform on `L^p`.
    pub fn dual_pair(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(LabError::domain("p", format!("must be in (1, inf), got {p}")));
        }
        Self::new(crate::conjugate(p), p)
    }

    /// `(p, p)`, which reproduces the `L^p` norm.
    pub fn lebesgue(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    pub fn alpha(&self) -> f64 {
        self.s / self.r
    }

    pub fn is_weak(&self) -> bool {
        self.s.is_infinite()
    }
}

/// Compensated (Neumaier) summation.
pub(crate) fn accurate_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `(t1^α - t0^α) / α` without cancellation for narrow steps.
#[inline]
pub(crate) fn power_increment(t0: f64, t1: f64, alpha: f64) -> f64 {
    if t1 <= t0 {
        return 0.0;
    }
    if t0 <= 0.0 {
        return t1.powf(alpha) / alpha;
    }
    t0.powf(alpha) * (alpha * ((t1 - t0) / t0).ln_1p()).exp_m1() / alpha
}

/// `∫_lo^hi t^{α-1} R(t)^s dt` for a step rearrangement, `s < ∞`.
fn step_power_integral(r: &StepRearrangement, idx: LorentzIndex, lo: f64, hi: f64) -> f64 {
    let alpha = idx.alpha();
    accurate_sum(r.steps().filter_map(|(t0, t1, v)| {
        let a = t0.max(lo);
        let b = t1.min(hi);
        (b > a).then(|| v.powf(idx.s) * power_increment(a, b, alpha))
    }))
}

/// `∫_lo^hi t^{α-1} (D/t)^s dt`, or `None` when it diverges.
fn hyperbola_power_integral(d: f64, idx: LorentzIndex, lo: f64, hi: f64) -> Option<f64> {
    if d == 0.0 || hi <= lo {
        return Some(0.0);
    }
    let e = idx.alpha() - idx.s;
    let ds = d.powf(idx.s);
    if e < 0.0 {
        let upper = if hi.is_finite() { hi.powf(e) } else { 0.0 };
        Some(ds * (lo.powf(e) - upper) / (-e))
    } else if hi.is_finite() {
        if e == 0.0 {
            Some(ds * (hi / lo).ln())
        } else {
            Some(ds * power_increment(lo, hi, e))
        }
    } else {
        None
    }
}

/// Exact `‖R‖_{r,s}` of a step rearrangement.
pub fn lorentz_norm_step(r: &StepRearrangement, idx: LorentzIndex) -> f64 {
    if idx.is_weak() {
        return r
            .steps()
            .map(|(_, t1, v)| t1.powf(1.0 / idx.r) * v)
            .fold(0.0, f64::max);
    }
    step_power_integral(r, idx, 0.0, f64::INFINITY).powf(1.0 / idx.s)
}

/// Bracket on the `s`-th power `∫_window t^{α-1} (f^*)^s dt`.
pub fn lorentz_power_enclosure(
    r: &RearrangementEnclosure,
    idx: LorentzIndex,
    window: Option<(f64, f64)>,
) -> Result<Bracket> {
    if idx.is_weak() {
        return Err(LabError::Unsupported(
            "the s-th power integral is undefined for s = inf".into(),
        ));
    }
    let (lo, hi) = match window {
        Some((lo, hi)) => {
            if !(lo > 0.0 && lo < hi) {
                return Err(LabError::domain(
                    "window",
                    format!("need 0 < lo < hi, got ({lo}, {hi})"),
                ));
            }
            (lo, hi)
        }
        None => (0.0, f64::INFINITY),
    };
    let lower = step_power_integral(&r.lower, idx, lo, hi);
    let mut upper = step_power_integral(&r.upper, idx, lo, hi);
    if r.tail > 0.0 {
        let start = r.tail_start.max(lo);
        upper += hyperbola_power_integral(r.tail, idx, start, hi).ok_or_else(|| {
            LabError::Unsupported(format!(
                "the tail D/t is not integrable against t^(s/r-1) for r = {}",
                idx.r
            ))
        })?;
    }
    Bracket::new(lower.max(0.0), upper.max(lower)).map(Bracket::outward)
}

/// Bracket on `(∫_window (t^{1/r} f^*(t))^s dt/t)^{1/s}`, over `(0, ∞)` when
/// no window is given.
pub fn lorentz_norm_enclosure(
    r: &RearrangementEnclosure,
    idx: LorentzIndex,
    window: Option<(f64, f64)>,
) -> Result<Bracket> {
    if idx.is_weak() {
        if window.is_some() {
            return Err(LabError::Unsupported(
                "windowed integrals are not defined for s = inf".into(),
            ));
        }
        let lo = lorentz_norm_step(&r.lower, idx);
        let mut hi = lorentz_norm_step(&r.upper, idx);
        if r.tail > 0.0 {
            // t^{1/r} D/t on [T, ∞) is bounded only when r >= 1.
            if idx.r < 1.0 {
                return Err(LabError::Unsupported(
                    "weak-type tail is unbounded for r < 1".into(),
                ));
            }
            hi = hi.max(r.tail * r.tail_start.powf(1.0 / idx.r - 1.0));
        }
        return Bracket::new(lo, hi.max(lo)).map(Bracket::outward);
    }
    let pow = lorentz_power_enclosure(r, idx, window)?;
    let inv = 1.0 / idx.s;
    Bracket::new(pow.lo.powf(inv), pow.hi.powf(inv)).map(Bracket::outward)
}

/// Exact `‖f‖_p` of a piecewise-constant function, `p ∈ [1, ∞]`.
pub fn lp_norm_pc(f: &PiecewiseConstantFn, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(LabError::domain("p", format!("must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.pieces().iter().map(|q| q.value.abs()).fold(0.0, f64::max));
    }
    let sum = accurate_sum(
        f.pieces()
            .iter()
            .map(|q| q.value.abs().powf(p) * q.measure()),
    );
    Ok(sum.powf(1.0 / p))
}

/// Magnitudes of a sequence known on a finite head.
///
/// Supplier contract (unchecked): the head lists the magnitudes of a subset
/// of the sequence, every entry outside the head is at most `T/(K+1)` with
/// `K` the head length, and the sorted sequence obeys `c_k^* <= T/k` for
/// `k > K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeSequence {
    head: Vec<f64>,
    tail: f64,
}

impl MagnitudeSequence {
    pub fn new(head: Vec<f64>, tail: f64) -> Result<Self> {
        if let Some(bad) = head.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(LabError::Validation(format!(
                "sequence magnitudes must be finite and >= 0, got {bad}"
            )));
        }
        if !(tail >= 0.0 && tail.is_finite()) {
            return Err(LabError::Validation(format!("bad tail constant {tail}")));
        }
        Ok(MagnitudeSequence { head, tail })
    }

    pub fn head(&self) -> &[f64] {
        &self.head
    }

    pub fn tail_constant(&self) -> f64 {
        self.tail
    }
}

/// Bracket on `(Σ_k k^{s/r-1} (c_k^*)^s)^{1/s}`.
///
/// For `(r, s) = (p', p)` the weight is `(k^{1/p'-1/p})^p`, the discrete
/// analogue of the continuous norm. Other indices follow the same template.
pub fn sequence_lorentz_norm(c: &MagnitudeSequence, idx: LorentzIndex) -> Result<Bracket> {
    if idx.is_weak() {
        return Err(LabError::Unsupported(
            "sequence norms are implemented for s < inf".into(),
        ));
    }
    let mut head = c.head.clone();
    head.sort_unstable_by(|a, b| b.total_cmp(a));
    let k_len = head.len();
    let w = idx.alpha() - 1.0;
    let s = idx.s;
    let lower = accurate_sum(
        head.iter()
            .enumerate()
            .map(|(k, v)| ((k + 1) as f64).powf(w) * v.powf(s)),
    );
    let mut upper = lower;
    if c.tail > 0.0 {
        let floor = c.tail / (k_len + 1) as f64;
        upper = accurate_sum(
            head.iter()
                .enumerate()
                .map(|(k, v)| ((k + 1) as f64).powf(w) * v.max(floor).powf(s)),
        );
        // Σ_{k>K} k^{α-1} (T/k)^s <= T^s ∫_K^∞ x^{-β} dx with β = 1 + s - α.
        let beta = 1.0 + s - idx.alpha();
        if !(beta > 1.0) || k_len == 0 {
            return Err(LabError::Unsupported(format!(
                "tail envelope T/k is not summable for r = {}",
                idx.r
            )));
        }
        upper += c.tail.powf(s) * (k_len as f64).powf(1.0 - beta) / (beta - 1.0);
    }
    let inv = 1.0 / s;
    Bracket::new(lower.powf(inv), upper.powf(inv)).map(Bracket::outward)
}

/// Prefix integrals of one step rearrangement for fast windowed queries
/// during threshold searches. Results are estimates; callers re-verify with
/// [`lorentz_norm_enclosure`].
#[derive(Clone, Debug)]
pub(crate) struct PowerPrefix {
    breaks: Vec<f64>,
    values_s: Vec<f64>,
    cum: Vec<f64>,
    alpha: f64,
}

impl PowerPrefix {
    pub(crate) fn new(r: &StepRearrangement, idx: LorentzIndex) -> Self {
        let alpha = idx.alpha();
        let values_s: Vec<f64> = r.values().iter().map(|v| v.powf(idx.s)).collect();
        let mut cum = Vec::with_capacity(r.len());
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for ((t0, t1, _), vs) in r.steps().zip(&values_s) {
            let x = vs * power_increment(t0, t1, alpha);
            let t = sum + x;
            comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
            sum = t;
            cum.push(sum + comp);
        }
        PowerPrefix {
            breaks: r.breaks().to_vec(),
            values_s,
            cum,
            alpha,
        }
    }

    /// `∫_0^x`.
    pub(crate) fn up_to(&self, x: f64) -> f64 {
        if x <= 0.0 || self.breaks.is_empty() {
            return 0.0;
        }
        let k = self.breaks.partition_point(|&b| b <= x);
        let (base, t0) = if k == 0 {
            (0.0, 0.0)
        } else {
            (self.cum[k - 1], self.breaks[k - 1])
        };
        if k == self.breaks.len() {
            return base;
        }
        base + self.values_s[k] * power_increment(t0, x, self.alpha)
    }

    pub(crate) fn total(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    #[cfg(test)]
    fn between(&self, lo: f64, hi: f64) -> f64 {
        (self.up_to(hi) - self.up_to(lo)).max(0.0)
    }
}
