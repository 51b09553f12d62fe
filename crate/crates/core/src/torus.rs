// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Fourier coefficients of `g_a` on the circle and their comparison with
//! the continuous transform.
//!
//! With `c_m = ∫_{-π}^{π} g_a(t) e^{-itm} dt` the coefficients are
//! `2 (a/2)^{1/p} sin(m/a)/m` and `(2/a)^{1/p'}` at `m = 0`. The step
//! function taking the value `c_m` on `[m, m+1)` (mirrored to the negative
//! axis) turns into a sampled copy of `F g_1` under
//! `T_a f(x) = a^{1/p'} f(a x)`, which is what drives the discrete norms
//! towards `c_p` as `a` grows.

use serde::{Deserialize, Serialize};

use crate::bracket::{Bracket, ROUNDING_SLACK};
use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::fourier::{ft_indicator_1d, SINC_SLOPE_MAX};
use crate::lorentz::{accurate_sum, sequence_lorentz_norm, LorentzIndex, MagnitudeSequence};
use crate::measure::{rearrange_pc, Interval, PiecewiseConstantFn};

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p < 2.0) {
        return Err(LabError::domain("p", format!("must lie in (1, 2), got {p}")));
    }
    Ok(())
}

/// `g_a` on `[-π, π]` for an integer `a >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusTestFunction {
    pub a: u64,
    pub p: f64,
}

impl TorusTestFunction {
    pub fn new(a: u64, p: f64) -> Result<Self> {
        if a == 0 {
            return Err(LabError::domain("a", "need a >= 1"));
        }
        check_p(p)?;
        Ok(TorusTestFunction { a, p })
    }

    pub fn coefficient(&self, m: i64) -> f64 {
        fourier_coefficient(self.a, self.p, m)
    }

    /// `2 (a/2)^{1/p}`, so that `|c_m| <= B/|m|`.
    pub fn envelope_constant(&self) -> f64 {
        2.0 * (self.a as f64 / 2.0).powf(1.0 / self.p)
    }
}

/// `c_m` in closed form.
pub fn fourier_coefficient(a: u64, p: f64, m: i64) -> f64 {
    let af = a as f64;
    if m == 0 {
        (2.0 / af).powf(1.0 - 1.0 / p)
    } else {
        let mf = m as f64;
        2.0 * (af / 2.0).powf(1.0 / p) * (mf / af).sin() / mf
    }
}

/// `{|c_m| : |m| <= M}` with the tail constant `T = 2B(K+1)/K`, `K = 2M+1`.
///
/// Off the head `|c_m| <= B/|m| <= B/(M+1)`, and at most `1 + 2B/v` entries
/// exceed any level `v`, so the sorted sequence satisfies
/// `c_k^* <= 2B/(k-1) <= T/k` for `k > K`.
pub fn coefficient_sequence(a: u64, p: f64, cutoff: u64, exec: Exec) -> Result<MagnitudeSequence> {
    let g = TorusTestFunction::new(a, p)?;
    if cutoff < 1 {
        return Err(LabError::domain("cutoff", "need M >= 1"));
    }
    let m = cutoff as i64;
    let k = (2 * cutoff + 1) as usize;
    let head = exec.map_range(k, |i| g.coefficient(i as i64 - m).abs());
    let kf = k as f64;
    let tail = 2.0 * g.envelope_constant() * (kf + 1.0) / kf * (1.0 + ROUNDING_SLACK);
    MagnitudeSequence::new(head, tail)
}

/// The even step function equal to `c_m` on `[m, m+1)` for `0 <= m <= M`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepExtension {
    pub test: TorusTestFunction,
    pub cutoff: u64,
    pub function: PiecewiseConstantFn,
}

impl StepExtension {
    pub fn new(test: TorusTestFunction, cutoff: u64) -> Result<Self> {
        let mut pieces = Vec::with_capacity(2 * cutoff as usize + 2);
        for m in 0..=cutoff {
            let c = test.coefficient(m as i64);
            let (lo, hi) = (m as f64, (m + 1) as f64);
            pieces.push((Interval::new(lo, hi)?, c));
            pieces.push((Interval::new(-hi, -lo)?, c));
        }
        Ok(StepExtension {
            test,
            cutoff,
            function: PiecewiseConstantFn::new(pieces)?,
        })
    }

    /// `T_a` applied to the extension: cells of width `1/a`.
    pub fn reverse_scaled(&self) -> Result<PiecewiseConstantFn> {
        reverse_scaling(&self.function, self.test.a as f64, self.test.p)
    }
}

/// `T_a f(x) = a^{1/p'} f(a x)`, the map sending `F g_a` to `F g_1`.
pub fn reverse_scaling(f: &PiecewiseConstantFn, a: f64, p: f64) -> Result<PiecewiseConstantFn> {
    f.dilate(a)?.scale(a.powf(1.0 - 1.0 / p))
}

/// `(∫ (σ_a(t)^{1/p'-1/p} (T_a ĝ)^*(t))^p dt)^{1/p}` with the staircase
/// `σ_a(t) = 2k/a` on `[2(k-1)/a, 2k/a)`, evaluated on the rearranged
/// step function itself.
pub fn staircase_norm(ext: &StepExtension) -> Result<f64> {
    let p = ext.test.p;
    let a = ext.test.a as f64;
    let w = (1.0 - 1.0 / p) * p - 1.0;
    let r = rearrange_pc(&ext.reverse_scaled()?);
    let cell = 2.0 / a;
    let mut terms = Vec::new();
    for (t0, t1, v) in r.steps() {
        let k0 = (t0 / cell).round() as u64;
        let k1 = (t1 / cell).round() as u64;
        for k in k0 + 1..=k1 {
            terms.push((2.0 * k as f64 / a).powf(w) * cell * v.powf(p));
        }
    }
    Ok(accurate_sum(terms).powf(1.0 / p))
}

/// `2^{1/p'} ‖{c_m}_{0 <= m <= M}‖_{p',p}`, the closed form of
/// [`staircase_norm`].
pub fn staircase_closed_form(ext: &StepExtension) -> Result<f64> {
    let p = ext.test.p;
    let head = (0..=ext.cutoff as i64).map(|m| ext.test.coefficient(m).abs()).collect();
    let norm = sequence_lorentz_norm(&MagnitudeSequence::new(head, 0.0)?, LorentzIndex::dual_pair(p)?)?;
    Ok(2f64.powf(1.0 - 1.0 / p) * norm.mid())
}

/// Bracket on `sup_x |F g_1(x) - T_a ĝ(x)|`: the lower end is the largest
/// gap seen at cell midpoints up to `cutoff`, the upper end the Lipschitz
/// bound `2^{1/p'} · 0.43619 / a`.
///
/// `T_a ĝ(x)` equals `F g_1(⌊a|x|⌋/a)`, so the gap never exceeds the
/// slope of `F g_1` times the cell width `1/a`.
pub fn uniform_closeness(a: u64, p: f64, cutoff: f64, exec: Exec) -> Result<Bracket> {
    let g = TorusTestFunction::new(a, p)?;
    let af = a as f64;
    let amp = 2f64.powf(-1.0 / p);
    let cells = (cutoff * af).ceil().max(1.0) as usize;
    let gaps = exec.map_range(cells, |m| {
        let x = (m as f64 + 0.5) / af;
        let step = af.powf(1.0 - 1.0 / p) * g.coefficient(m as i64);
        (amp * ft_indicator_1d(1.0, x) - step).abs()
    });
    let lo = gaps.into_iter().fold(0.0, f64::max);
    let hi = 2.0 * amp * SINC_SLOPE_MAX / af * (1.0 + ROUNDING_SLACK);
    Bracket::new(lo.min(hi), hi)
}

/// Truncation of the coefficient sequence used by [`discrepancy`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusResolution {
    /// `M = max(per_scale · a, min_cutoff)`.
    pub per_scale: u64,
    pub min_cutoff: u64,
    /// Fail with an unresolved error when the discrepancy bracket is wider.
    #[serde(default)]
    pub max_width: Option<f64>,
}

impl Default for TorusResolution {
    fn default() -> Self {
        TorusResolution {
            per_scale: 64,
            min_cutoff: 4096,
            max_width: None,
        }
    }
}

impl TorusResolution {
    pub fn cutoff(&self, a: u64) -> u64 {
        self.per_scale.saturating_mul(a).max(self.min_cutoff).max(1)
    }
}

/// One scale of the discrepancy study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyRow {
    pub a: u64,
    pub p: f64,
    pub cutoff: u64,
    /// `‖F g_a‖_{p',p} = c_p`.
    pub continuous: Bracket,
    /// `factor · ‖{c_m}_{m∈Z}‖_{p',p}`.
    pub sequence: Bracket,
    pub factor: f64,
    pub discrepancy: Bracket,
}

/// `|‖F g_a‖_{p',p} - ‖{c_m}‖_{p',p}|`, with `cp` a certified bracket on
/// `c_p` (the continuous norm is scale invariant).
pub fn discrepancy(a: u64, p: f64, cp: Bracket, res: &TorusResolution, exec: Exec) -> Result<DiscrepancyRow> {
    discrepancy_with_factor(a, p, cp, res, 1.0, exec)
}

/// [`discrepancy`] with the sequence norm multiplied by `factor`.
pub fn discrepancy_with_factor(
    a: u64,
    p: f64,
    cp: Bracket,
    res: &TorusResolution,
    factor: f64,
    exec: Exec,
) -> Result<DiscrepancyRow> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(LabError::domain("factor", format!("must be > 0, got {factor}")));
    }
    let cutoff = res.cutoff(a);
    let seq = coefficient_sequence(a, p, cutoff, exec)?;
    let sequence = sequence_lorentz_norm(&seq, LorentzIndex::dual_pair(p)?)?
        .scale(factor)
        .outward();
    let d = cp.abs_diff(&sequence).outward();
    let discrepancy = Bracket {
        lo: d.lo.max(0.0),
        hi: d.hi,
    };
    if let Some(tol) = res.max_width {
        if discrepancy.width() > tol {
            return Err(LabError::unresolved(
                format!("discrepancy bracket at a = {a}"),
                discrepancy.width(),
                tol,
            ));
        }
    }
    Ok(DiscrepancyRow {
        a,
        p,
        cutoff,
        continuous: cp,
        sequence,
        factor,
        discrepancy,
    })
}

/// Least tested scale whose certified discrepancy is at most `gamma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScale {
    pub gamma: f64,
    pub a0: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub p: f64,
    pub rows: Vec<DiscrepancyRow>,
    pub thresholds: Vec<ThresholdScale>,
    /// Upper ends nonincreasing along the ladder (observed, not guaranteed).
    pub nonincreasing: bool,
}

/// Discrepancy brackets along an increasing ladder of scales.
pub fn convergence_study(
    p: f64,
    scales: &[u64],
    gammas: &[f64],
    cp: Bracket,
    res: &TorusResolution,
    exec: Exec,
) -> Result<ConvergenceStudy> {
    if scales.is_empty() {
        return Err(LabError::domain("scales", "need at least one scale"));
    }
    if scales.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::domain("scales", "must be strictly increasing"));
    }
    let rows = scales
        .iter()
        .map(|&a| discrepancy(a, p, cp, res, exec))
        .collect::<Result<Vec<_>>>()?;
    let thresholds = gammas
        .iter()
        .map(|&gamma| ThresholdScale {
            gamma,
            a0: rows.iter().find(|r| r.discrepancy.hi <= gamma).map(|r| r.a),
        })
        .collect();
    let nonincreasing = rows
        .windows(2)
        .all(|w| w[1].discrepancy.hi <= w[0].discrepancy.hi);
    Ok(ConvergenceStudy {
        p,
        rows,
        thresholds,
        nonincreasing,
    })
}

impl ConvergenceStudy {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "a,p,continuous_lo,continuous_hi,sequence_lo,sequence_hi,discrepancy_upper\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                r.a,
                r.p,
                r.continuous.lo,
                r.continuous.hi,
                r.sequence.lo,
                r.sequence.hi,
                r.discrepancy.hi
            ));
        }
        out
    }
}
