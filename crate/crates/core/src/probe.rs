// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Estimates over the span of a witness family.
//!
//! For `f = Σ α_j φ_j` the crate offers an exact `‖f‖_p`
//! ([`upper_estimate`]), a certified lower bound on `‖F f‖_{p',p}` assembled
//! from the per-level certificates ([`chain_lower_bound`]) and a direct
//! multiscale enclosure of `|F f|` for a few levels
//! ([`direct_lorentz_norm`]). [`min_ratio`] searches the unit sphere of a
//! `k`-dimensional section for the smallest image/preimage ratio.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bracket::{Bracket, ROUNDING_SLACK};
use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::fourier::{ft_indicator_1d, sinc_slope, PartitionSpec, ReferenceProfile};
use crate::lorentz::{accurate_sum, lorentz_norm_enclosure, lp_norm_pc, LorentzIndex};
use crate::measure::{GridEnclosure, Interval, PiecewiseConstantFn};
use crate::witness::WitnessFamily;

/// Coefficients `α_1..α_k` and `A = (Σ|α_j|^p)^{1/p}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub alpha: Vec<f64>,
    #[serde(rename = "A")]
    pub a_norm: f64,
}

impl CoefficientVector {
    pub fn new(alpha: Vec<f64>, p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(LabError::domain("p", format!("must be finite and >= 1, got {p}")));
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(LabError::domain("alpha", "coefficients must be finite"));
        }
        let a_norm = lp_seq(&alpha, p);
        Ok(CoefficientVector { alpha, a_norm })
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.iter().all(|&a| a == 0.0)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        CoefficientVector {
            alpha: self.alpha.iter().map(|a| lambda * a).collect(),
            a_norm: lambda.abs() * self.a_norm,
        }
    }
}

/// `(Σ|x_i|^q)^{1/q}`, scaled by the largest entry to avoid overflow.
fn lp_seq(x: &[f64], q: f64) -> f64 {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * accurate_sum(x.iter().map(|v| (v.abs() / m).powf(q))).powf(1.0 / q)
}

fn check_len(family: &WitnessFamily, coeffs: &CoefficientVector) -> Result<()> {
    if coeffs.len() > family.len() {
        return Err(LabError::domain(
            "coeffs",
            format!(
                "{} coefficients for a family of {} levels",
                coeffs.len(),
                family.len()
            ),
        ));
    }
    Ok(())
}

/// Heights `(2/a_j)^{-1/p}` of the first `k` levels.
fn heights(family: &WitnessFamily, k: usize) -> Vec<f64> {
    family.levels[..k]
        .iter()
        .map(|l| (2.0 / l.a_f64()).powf(-1.0 / family.p))
        .collect()
}

/// `Σ α_j φ_j` as nested symmetric steps.
pub fn assemble_pc(family: &WitnessFamily, coeffs: &CoefficientVector) -> Result<PiecewiseConstantFn> {
    check_len(family, coeffs)?;
    let k = coeffs.len();
    if coeffs.is_zero() {
        return Ok(PiecewiseConstantFn::zero(1));
    }
    let h = heights(family, k);
    let radii: Vec<f64> = family.levels[..k].iter().map(|l| 1.0 / l.a_f64()).collect();
    let mut pieces = Vec::with_capacity(2 * k + 1);
    let mut value = 0.0;
    for j in 0..k {
        value += coeffs.alpha[j] * h[j];
        if j + 1 < k {
            let (outer, inner) = (radii[j], radii[j + 1]);
            pieces.push((Interval::new(-outer, -inner)?, value));
            pieces.push((Interval::new(inner, outer)?, value));
        } else {
            pieces.push((Interval::new(-radii[j], radii[j])?, value));
        }
    }
    PiecewiseConstantFn::new(pieces)
}

/// Exact `‖Σ α_j φ_j‖_p`.
pub fn upper_estimate(family: &WitnessFamily, coeffs: &CoefficientVector) -> Result<f64> {
    lp_norm_pc(&assemble_pc(family, coeffs)?, family.p)
}

/// Certified bracket whose lower end bounds `‖F(Σ α_j φ_j)‖_{p',p}` from
/// below.
///
/// The in-window parts have disjoint supports and their rearrangements are
/// integrated over disjoint windows `I_j`, which gives
/// `(Σ|α_j|^p W_j^p)^{1/p}`; the off-window parts are removed with the
/// triangle inequality.
pub fn chain_lower_bound(family: &WitnessFamily, coeffs: &CoefficientVector) -> Result<Bracket> {
    check_len(family, coeffs)?;
    if !family.is_certified() {
        return Err(LabError::Uncertified(
            "chain bound requested for a family whose certificates do not hold".into(),
        ));
    }
    let windows: Vec<Bracket> = family.levels[..coeffs.len()]
        .iter()
        .map(|l| l.certificate.windowed)
        .collect();
    let off: Vec<Bracket> = family.levels[..coeffs.len()]
        .iter()
        .map(|l| l.certificate.off_window)
        .collect();
    Ok(disjoint_chain(&coeffs.alpha, family.p, &windows, &off))
}

/// `(Σ|α_j|^q in_j^q)^{1/q} - Σ|α_j| off_j`, clamped at zero.
fn disjoint_chain(alpha: &[f64], q: f64, inside: &[Bracket], off: &[Bracket]) -> Bracket {
    let main_lo = lp_seq(
        &alpha.iter().zip(inside).map(|(a, b)| a * b.lo).collect::<Vec<_>>(),
        q,
    );
    let main_hi = lp_seq(
        &alpha.iter().zip(inside).map(|(a, b)| a * b.hi).collect::<Vec<_>>(),
        q,
    );
    let off_hi = accurate_sum(alpha.iter().zip(off).map(|(a, b)| a.abs() * b.hi));
    let off_lo = accurate_sum(alpha.iter().zip(off).map(|(a, b)| a.abs() * b.lo));
    let lo = ((main_lo - off_hi) * (1.0 - ROUNDING_SLACK)).max(0.0);
    let hi = ((main_hi - off_lo) * (1.0 + ROUNDING_SLACK)).max(lo);
    Bracket { lo, hi }
}

/// Grid used by [`direct_lorentz_norm`]: the reference partition is dilated
/// by every active scale and the node sets are merged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectGrid {
    pub partition: PartitionSpec,
    pub max_levels: usize,
    /// Fail when `width / hi` of the bracket exceeds this.
    pub max_relative_width: f64,
}

impl Default for DirectGrid {
    fn default() -> Self {
        DirectGrid {
            partition: PartitionSpec::Graded {
                split: 1.0 / 16.0,
                per_octave: 4,
                octaves: 48,
                layers: vec![
                    crate::fourier::Layer {
                        end: 64.0,
                        step: 1.0 / 128.0,
                    },
                    crate::fourier::Layer {
                        end: 2048.0,
                        step: 1.0 / 8.0,
                    },
                ],
            },
            max_levels: 3,
            max_relative_width: 0.1,
        }
    }
}

/// Per-cell enclosure of `|Σ c_j · 2 sin(x/a_j)/x|`.
fn sum_enclosure(terms: &[(f64, f64)], grid: &DirectGrid, exec: Exec) -> Result<GridEnclosure> {
    let base = grid.partition.nodes()?;
    let mut nodes: Vec<f64> = terms
        .iter()
        .flat_map(|&(_, a)| base.iter().map(move |x| a * x))
        .collect();
    nodes.sort_unstable_by(f64::total_cmp);
    nodes.dedup();
    let vals: Vec<Vec<f64>> = terms
        .iter()
        .map(|&(c, a)| exec.map_range(nodes.len(), |i| c * ft_indicator_1d(a, nodes[i])))
        .collect();
    let bounds = exec.map_range(nodes.len() - 1, |i| {
        let (x0, x1) = (nodes[i], nodes[i + 1]);
        let w = x1 - x0;
        let (mut lo, mut hi) = (0.0, 0.0);
        for (t, &(c, a)) in terms.iter().enumerate() {
            let (f0, f1) = (vals[t][i], vals[t][i + 1]);
            let amp = c.abs();
            let peak = 2.0 * amp / a;
            let env = if x0 > 0.0 { peak.min(2.0 * amp / x0) } else { peak };
            let l = sinc_slope(amp, a, x0, x1);
            let slack = ROUNDING_SLACK * env + 8.0 * f64::EPSILON * peak;
            lo += (0.5 * (f0 + f1 - l * w)).max(-env) - slack;
            hi += (0.5 * (f0 + f1 + l * w)).min(env) + slack;
        }
        let up = lo.abs().max(hi.abs()) * (1.0 + ROUNDING_SLACK);
        let down = if lo > 0.0 {
            lo
        } else if hi < 0.0 {
            -hi
        } else {
            0.0
        };
        ((down * (1.0 - ROUNDING_SLACK)).min(up), up)
    });
    let (lower, upper): (Vec<f64>, Vec<f64>) = bounds.into_iter().unzip();
    let tail = accurate_sum(terms.iter().map(|&(c, _)| 2.0 * c.abs())) * (1.0 + ROUNDING_SLACK);
    Ok(GridEnclosure::from_parts_unchecked(nodes, lower, upper, tail))
}

/// Direct bracket on `‖F(Σ α_j φ_j)‖` in the `(r, s)` Lorentz quasinorm
/// `idx`, from an enclosure of the transform on a merged multiscale grid.
pub fn direct_norm(
    family: &WitnessFamily,
    coeffs: &CoefficientVector,
    idx: LorentzIndex,
    grid: &DirectGrid,
    exec: Exec,
) -> Result<Bracket> {
    check_len(family, coeffs)?;
    if coeffs.len() > grid.max_levels {
        return Err(LabError::Unsupported(format!(
            "direct evaluation is limited to {} levels, got {}",
            grid.max_levels,
            coeffs.len()
        )));
    }
    let h = heights(family, coeffs.len());
    let terms: Vec<(f64, f64)> = coeffs
        .alpha
        .iter()
        .zip(&h)
        .zip(&family.levels)
        .filter(|((&c, _), _)| c != 0.0)
        .map(|((&c, &hj), l)| (c * hj, l.a_f64()))
        .collect();
    if terms.is_empty() {
        return Ok(Bracket::zero());
    }
    let enc = sum_enclosure(&terms, grid, exec)?;
    let b = lorentz_norm_enclosure(&enc.rearrange(exec), idx, None)?;
    if b.width() > grid.max_relative_width * b.hi {
        return Err(LabError::unresolved(
            "direct norm relative width",
            b.width() / b.hi,
            grid.max_relative_width,
        ));
    }
    Ok(b)
}

/// [`direct_norm`] in `L^{p',p}`.
pub fn direct_lorentz_norm(
    family: &WitnessFamily,
    coeffs: &CoefficientVector,
    grid: &DirectGrid,
    exec: Exec,
) -> Result<Bracket> {
    direct_norm(family, coeffs, LorentzIndex::dual_pair(family.p)?, grid, exec)
}

/// Target space of a min-ratio probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// `L^{p',p}`.
    Lorentz,
    /// `L^{p'}`.
    Lebesgue,
}

impl Target {
    pub fn index(self, p: f64) -> Result<LorentzIndex> {
        match self {
            Target::Lorentz => LorentzIndex::dual_pair(p),
            Target::Lebesgue => LorentzIndex::lebesgue(crate::conjugate(p)),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Lorentz => "lorentz",
            Target::Lebesgue => "lebesgue",
        })
    }
}

impl FromStr for Target {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lorentz" => Ok(Target::Lorentz),
            "lebesgue" => Ok(Target::Lebesgue),
            other => Err(LabError::domain(
                "target",
                format!("expected `lorentz` or `lebesgue`, got `{other}`"),
            )),
        }
    }
}

/// How the numerator of a probe was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeMode {
    /// Direct grid evaluation of the transform of the actual span.
    Direct,
    /// Synthetic model with disjoint supports in time and frequency:
    /// `‖f‖_p = A`, `‖F f‖_{p',p} = c_p A`, `‖F f‖_{p'} = κ ‖α‖_{p'}`.
    Model,
}

/// Everything a probe needs besides the coefficients: the family, the
/// reference constants in both targets and the per-level `L^{p'}` window
/// norms used for the Lebesgue chain bound.
#[derive(Clone, Debug)]
pub struct ProbeContext {
    pub family: WitnessFamily,
    /// `‖F g_1‖_{p',p}`.
    pub cp: Bracket,
    /// `‖F g_1‖_{p'}`.
    pub kappa: Bracket,
    /// `‖F g_1 χ_{Ĝ_j}‖_{p'}` per level, at the reference scale.
    pub lebesgue_in: Vec<Bracket>,
    /// `‖F g_1 χ_{off Ĝ_j}‖_{p'}` per level.
    pub lebesgue_off: Vec<Bracket>,
    pub grid: DirectGrid,
    /// Independent optimizer starts.
    pub starts: usize,
    /// Coordinate steps stop shrinking below this.
    pub step_tolerance: f64,
    pub exec: Exec,
}

impl ProbeContext {
    pub fn new(family: &WitnessFamily, profile: &ReferenceProfile, exec: Exec) -> Result<Self> {
        if profile.p() != family.p {
            return Err(LabError::domain(
                "profile",
                format!("profile p = {} differs from family p = {}", profile.p(), family.p),
            ));
        }
        let leb = LorentzIndex::lebesgue(crate::conjugate(family.p))?;
        let kappa = lorentz_norm_enclosure(&profile.rearrangement, leb, None)?;
        let mut lebesgue_in = Vec::with_capacity(family.len());
        let mut lebesgue_off = Vec::with_capacity(family.len());
        for l in &family.levels {
            let inside = profile.enclosure.restrict(&[Interval {
                lo: l.nu_l,
                hi: l.nu_r,
            }]);
            let outside = profile.enclosure.restrict(&[
                Interval { lo: 0.0, hi: l.nu_l },
                Interval {
                    lo: l.nu_r,
                    hi: f64::INFINITY,
                },
            ]);
            lebesgue_in.push(lorentz_norm_enclosure(&inside.rearrange(exec), leb, None)?);
            lebesgue_off.push(lorentz_norm_enclosure(&outside.rearrange(exec), leb, None)?);
        }
        Ok(ProbeContext {
            family: family.clone(),
            cp: family.cp,
            kappa,
            lebesgue_in,
            lebesgue_off,
            grid: DirectGrid::default(),
            starts: 8,
            step_tolerance: 1e-3,
            exec,
        })
    }

    /// Certified lower bound on `‖F(Σ α_j φ_j)‖_{p'}` from the disjoint
    /// frequency windows.
    pub fn lebesgue_chain_lower_bound(&self, coeffs: &CoefficientVector) -> Result<Bracket> {
        check_len(&self.family, coeffs)?;
        let k = coeffs.len();
        Ok(disjoint_chain(
            &coeffs.alpha,
            crate::conjugate(self.family.p),
            &self.lebesgue_in[..k],
            &self.lebesgue_off[..k],
        ))
    }

    /// Certified lower bound on the target norm of the image.
    pub fn chain_lower(&self, coeffs: &CoefficientVector, target: Target) -> Result<Bracket> {
        match target {
            Target::Lorentz => chain_lower_bound(&self.family, coeffs),
            Target::Lebesgue => self.lebesgue_chain_lower_bound(coeffs),
        }
    }

    fn mode_for(&self, k: usize) -> ProbeMode {
        if k <= self.family.len() && k <= self.grid.max_levels {
            ProbeMode::Direct
        } else {
            ProbeMode::Model
        }
    }

    /// Ratio bracket `‖F f‖ / ‖f‖_p` at `α` (any norm of `α`).
    pub fn ratio(&self, alpha: &[f64], target: Target, mode: ProbeMode) -> Result<Bracket> {
        let p = self.family.p;
        let coeffs = CoefficientVector::new(alpha.to_vec(), p)?;
        if coeffs.is_zero() {
            return Err(LabError::domain("alpha", "ratio of the zero vector"));
        }
        match mode {
            ProbeMode::Model => {
                let a = coeffs.a_norm;
                Ok(match target {
                    Target::Lorentz => self.cp,
                    Target::Lebesgue => self.kappa.scale(lp_seq(alpha, crate::conjugate(p)) / a),
                })
            }
            ProbeMode::Direct => {
                let num = direct_norm(
                    &self.family,
                    &coeffs,
                    target.index(p)?,
                    &self.grid,
                    self.exec,
                )?;
                let den = upper_estimate(&self.family, &coeffs)?;
                Ok(num.scale(1.0 / den))
            }
        }
    }
}

/// Outcome of one min-ratio search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub k: usize,
    pub target: Target,
    pub mode: ProbeMode,
    /// Smallest ratio midpoint seen over all probed points.
    pub min_ratio: f64,
    /// Ratio bracket at the minimiser.
    pub ratio_bracket: Bracket,
    pub argmin: CoefficientVector,
    /// Chain lower bound over `‖f‖_p` at the minimiser, when the minimiser
    /// lies in the built family.
    pub certified_lower: Option<f64>,
    pub budget: usize,
    pub seed: u64,
    pub starts: usize,
    pub evaluations: usize,
    pub converged: bool,
}

struct StartResult {
    x: Vec<f64>,
    value: f64,
    evaluations: usize,
    converged: bool,
}

fn normalize(x: &mut [f64], p: f64) -> bool {
    let n = lp_seq(x, p);
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= n);
    true
}

/// Pattern search on the `ℓ^p` sphere: try `x ± step e_i`, renormalise,
/// keep improvements, halve the step after a sweep without one.
fn descend<F>(
    mut x: Vec<f64>,
    p: f64,
    f: &F,
    budget: usize,
    tol: f64,
) -> Result<StartResult>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut fx = f(&x)?;
    let mut evaluations = 1;
    let mut step = 0.5;
    while step >= tol {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                if evaluations >= budget {
                    return Ok(StartResult {
                        x,
                        value: fx,
                        evaluations,
                        converged: false,
                    });
                }
                let mut y = x.clone();
                y[i] += dir * step;
                if !normalize(&mut y, p) {
                    continue;
                }
                let fy = f(&y)?;
                evaluations += 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(StartResult {
        x,
        value: fx,
        evaluations,
        converged: true,
    })
}

/// Smallest `‖F f‖_target / ‖f‖_p` found over the unit sphere of
/// `span{φ_1..φ_k}`.
///
/// Sections with `k` up to the grid limit use the direct evaluation; larger
/// ones (including `k` past the built family) use the disjoint model. Each
/// start draws its point from its own ChaCha8 stream seeded from `seed`, so
/// the result does not depend on the execution strategy.
pub fn min_ratio(
    ctx: &ProbeContext,
    k: usize,
    target: Target,
    budget: usize,
    seed: u64,
) -> Result<RatioReport> {
    if k == 0 {
        return Err(LabError::domain("k", "need k >= 1"));
    }
    if budget == 0 {
        return Err(LabError::domain("budget", "need a positive budget"));
    }
    let p = ctx.family.p;
    let mode = ctx.mode_for(k);
    let objective = |x: &[f64]| ctx.ratio(x, target, mode).map(|b| b.mid());
    let starts = if k == 1 { 1 } else { ctx.starts.max(1) };
    let per_start = (budget / starts).max(1);
    // Direct evaluations already run data-parallel; model ones are cheap
    // enough that the starts themselves are the unit of parallel work.
    let outer = match mode {
        ProbeMode::Direct => Exec::Sequential,
        ProbeMode::Model => ctx.exec,
    };
    let results = outer.map_coarse(starts, |s| -> Result<StartResult> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        let mut x: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if !normalize(&mut x, p) {
            x = vec![1.0; k];
            normalize(&mut x, p);
        }
        if k == 1 {
            let value = objective(&x)?;
            return Ok(StartResult {
                x,
                value,
                evaluations: 1,
                converged: true,
            });
        }
        descend(x, p, &objective, per_start, ctx.step_tolerance)
    });
    let mut best: Option<StartResult> = None;
    let mut evaluations = 0;
    for r in results {
        let r = r?;
        evaluations += r.evaluations;
        if best.as_ref().map_or(true, |b| r.value < b.value) {
            best = Some(r);
        }
    }
    let best = best.expect("at least one start");
    let argmin = CoefficientVector::new(best.x, p)?;
    let ratio_bracket = ctx.ratio(&argmin.alpha, target, mode)?;
    let certified_lower = if k <= ctx.family.len() {
        let den = upper_estimate(&ctx.family, &argmin)?;
        Some(ctx.chain_lower(&argmin, target)?.lo / den)
    } else {
        None
    };
    Ok(RatioReport {
        k,
        target,
        mode,
        min_ratio: best.value,
        ratio_bracket,
        argmin,
        certified_lower,
        budget,
        seed,
        starts,
        evaluations,
        converged: best.converged,
    })
}

/// Least-squares slope of `log(min_ratio)` against `log(k)`.
pub fn decay_exponent(reports: &[RatioReport]) -> Result<f64> {
    if reports.len() < 3 {
        return Err(LabError::domain("reports", format!("need >= 3, got {}", reports.len())));
    }
    if reports.iter().any(|r| r.target != reports[0].target) {
        return Err(LabError::domain("reports", "mixed targets"));
    }
    if reports.windows(2).any(|w| w[1].k <= w[0].k) {
        return Err(LabError::domain("reports", "k must be strictly increasing"));
    }
    if reports.iter().any(|r| !(r.min_ratio > 0.0)) {
        return Err(LabError::domain("reports", "ratios must be positive"));
    }
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .map(|r| ((r.k as f64).ln(), r.min_ratio.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// CSV table with one row per report.
pub fn ratio_table_csv(reports: &[RatioReport]) -> String {
    let mut out = String::from("k,target,mode,min_ratio,converged,seed,budget\n");
    for r in reports {
        let mode = match r.mode {
            ProbeMode::Direct => "direct",
            ProbeMode::Model => "model",
        };
        out.push_str(&format!(
            "{},{},{},{:.12e},{},{},{}\n",
            r.k, r.target, mode, r.min_ratio, r.converged, r.seed, r.budget
        ));
    }
    out
}

/// One random point of the unit `ℓ^p` sphere with its two estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub index: usize,
    pub alpha: Vec<f64>,
    /// Exact `‖f‖_p`.
    pub upper: f64,
    /// Certified lower end of `‖F f‖_{p',p}`.
    pub lower: f64,
    pub ratio: f64,
}

/// `c_p^{lo} (1 - 3ε/2) / (1 + ε)`, the floor every sampled ratio must clear.
pub fn isomorphism_floor(family: &WitnessFamily) -> f64 {
    family.cp.lo * (1.0 - 1.5 * family.epsilon) / (1.0 + family.epsilon)
}

/// Draws `samples` points uniformly from the cube, projects them to the unit
/// sphere of `ℓ^p_J` and records `lower / upper` for each.
pub fn sample_ratios(family: &WitnessFamily, samples: usize, seed: u64) -> Result<Vec<SampleRow>> {
    let k = family.len();
    if k == 0 {
        return Err(LabError::domain("family", "no levels"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(samples);
    while rows.len() < samples {
        let mut x: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if lp_seq(&x, family.p) < 1e-3 || !normalize(&mut x, family.p) {
            continue;
        }
        let coeffs = CoefficientVector::new(x, family.p)?;
        let upper = upper_estimate(family, &coeffs)?;
        let lower = chain_lower_bound(family, &coeffs)?.lo;
        rows.push(SampleRow {
            index: rows.len(),
            alpha: coeffs.alpha,
            upper,
            lower,
            ratio: lower / upper,
        });
    }
    Ok(rows)
}
