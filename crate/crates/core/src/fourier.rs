// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Transforms of interval indicators and the constant `c_p`.
//!
//! With `F f(x) = ∫ f(t) e^{-ixt} dt`, the indicator `f_a = χ_[-1/a, 1/a]`
//! has `F f_a(x) = 2 sin(x/a)/x`, and the `L^p`-normalised
//! `g_a = (2/a)^{-1/p} f_a` has a transform whose `L^{p',p}` norm `c_p`
//! does not depend on `a`.
//!
//! Grids are enclosed cell by cell: `|h|` is Lipschitz on each cell, so the
//! tent through the endpoint values bounds it from above and below.

use serde::{Deserialize, Serialize};

use crate::bracket::{Bracket, ROUNDING_SLACK};
use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::lorentz::{lorentz_norm_enclosure, lorentz_norm_step, LorentzIndex};
use crate::measure::{GridEnclosure, RearrangementEnclosure, StepRearrangement};

/// Global maximum of `|d/du (sin u / u)|`, rounded up.
pub const SINC_SLOPE_MAX: f64 = 0.43619;

/// `sin(u)/u` with the value 1 at the origin.
#[inline]
pub fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        u.sin() / u
    }
}

/// `2 sin(x/a)/x`, the transform of `χ_[-1/a, 1/a]` on the line.
#[inline]
pub fn ft_indicator_1d(a: f64, x: f64) -> f64 {
    (2.0 / a) * sinc(x / a)
}

/// `F f_a(x) = ∏_k 2 sin(x_k/a)/x_k` for the cube `[-1/a, 1/a]^d`.
pub fn eval_ft_indicator(a: f64, x: &[f64]) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(LabError::domain("a", format!("must be > 0, got {a}")));
    }
    if x.is_empty() {
        return Err(LabError::domain("x", "need at least one coordinate"));
    }
    Ok(x.iter().map(|&xk| ft_indicator_1d(a, xk)).product())
}

fn check_p(p: f64, allow_boundary: bool) -> Result<()> {
    let ok = if allow_boundary {
        p > 1.0 && p <= 2.0
    } else {
        p > 1.0 && p < 2.0
    };
    if ok {
        Ok(())
    } else {
        let range = if allow_boundary { "(1, 2]" } else { "(1, 2)" };
        Err(LabError::domain("p", format!("must lie in {range}, got {p}")))
    }
}

/// `F g_a` for the normalised cube indicator
/// `g_a = (2/a)^{-d/p} χ_[-1/a, 1/a]^d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SincProfile {
    pub a: f64,
    pub p: f64,
    pub d: usize,
}

impl SincProfile {
    pub fn new(a: f64, p: f64, d: usize) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(LabError::domain("a", format!("must be > 0, got {a}")));
        }
        check_p(p, false)?;
        if d == 0 {
            return Err(LabError::domain("d", "must be positive"));
        }
        Ok(SincProfile { a, p, d })
    }

    /// `(2/a)^{-d/p}`.
    pub fn amplitude(&self) -> f64 {
        (2.0 / self.a).powf(-(self.d as f64) / self.p)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(LabError::domain("x", format!("expected {} coordinates", self.d)));
        }
        Ok(self.amplitude() * eval_ft_indicator(self.a, x)?)
    }
}

/// How `[0, X]` is cut into cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionSpec {
    /// `cells` equal cells.
    Uniform { cutoff: f64, cells: usize },
    /// Consecutive uniform layers starting at 0.
    Layered { layers: Vec<Layer> },
    /// One cell `[0, split · 2^{-octaves})`, geometric nodes
    /// `split · 2^{-i/per_octave}` up to `split`, then uniform layers.
    Graded {
        split: f64,
        per_octave: u32,
        octaves: u32,
        layers: Vec<Layer>,
    },
}

/// A run of equal cells of width `step` ending at `end`; it starts where
/// the previous layer ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub end: f64,
    pub step: f64,
}

fn check_layers(start: f64, layers: &[Layer]) -> Result<()> {
    if layers.is_empty() {
        return Err(LabError::domain("layers", "need at least one layer"));
    }
    let mut start = start;
    for l in layers {
        let n = (l.end - start) / l.step;
        if !(l.step > 0.0 && l.end > start && l.end.is_finite()) || n.fract() != 0.0 || n > 1e9 {
            return Err(LabError::domain(
                "layers",
                format!(
                    "layer [{start}, {}) is not a whole number of steps {}",
                    l.end, l.step
                ),
            ));
        }
        start = l.end;
    }
    Ok(())
}

fn push_layers(nodes: &mut Vec<f64>, start: f64, layers: &[Layer]) {
    let mut start = start;
    for l in layers {
        let n = ((l.end - start) / l.step) as usize;
        nodes.extend((1..=n).map(|k| start + k as f64 * l.step));
        start = l.end;
    }
}

fn refine_layers(layers: &[Layer]) -> Vec<Layer> {
    let mut out: Vec<Layer> = layers
        .iter()
        .map(|l| Layer {
            end: l.end,
            step: 0.5 * l.step,
        })
        .collect();
    let last = *layers.last().expect("validated");
    out.push(Layer {
        end: 2.0 * last.end,
        step: last.step,
    });
    out
}

impl PartitionSpec {
    pub fn uniform(cutoff: f64, cells: usize) -> Self {
        PartitionSpec::Uniform { cutoff, cells }
    }

    pub fn cutoff(&self) -> f64 {
        match self {
            PartitionSpec::Uniform { cutoff, .. } => *cutoff,
            PartitionSpec::Layered { layers } | PartitionSpec::Graded { layers, .. } => {
                layers.last().map_or(0.0, |l| l.end)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PartitionSpec::Uniform { cutoff, cells } => {
                if !(*cutoff > 0.0 && cutoff.is_finite()) {
                    return Err(LabError::domain("cutoff", format!("must be > 0, got {cutoff}")));
                }
                if *cells < 2 {
                    return Err(LabError::domain("cells", format!("need >= 2, got {cells}")));
                }
                Ok(())
            }
            PartitionSpec::Layered { layers } => check_layers(0.0, layers),
            PartitionSpec::Graded {
                split,
                per_octave,
                octaves,
                layers,
            } => {
                if !(*split > 0.0 && split.is_finite()) {
                    return Err(LabError::domain("split", format!("must be > 0, got {split}")));
                }
                if *per_octave == 0 || *octaves == 0 || *octaves > 900 {
                    return Err(LabError::domain(
                        "per_octave",
                        "per_octave must be >= 1 and octaves in 1..=900",
                    ));
                }
                check_layers(*split, layers)
            }
        }
    }

    pub fn nodes(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let mut nodes = vec![0.0];
        match self {
            PartitionSpec::Uniform { cutoff, cells } => {
                let h = cutoff / *cells as f64;
                nodes.extend((1..=*cells).map(|i| i as f64 * h));
            }
            PartitionSpec::Layered { layers } => push_layers(&mut nodes, 0.0, layers),
            PartitionSpec::Graded {
                split,
                per_octave,
                octaves,
                layers,
            } => {
                let m = (per_octave * octaves) as usize;
                let q = *per_octave as f64;
                for i in (1..=m).rev() {
                    nodes.push(split * (-(i as f64) / q).exp2());
                }
                nodes.push(*split);
                push_layers(&mut nodes, *split, layers);
            }
        }
        Ok(nodes)
    }

    /// Doubles the cutoff and halves every cell; the old nodes stay nodes.
    pub fn refined(&self) -> Self {
        match self {
            PartitionSpec::Uniform { cutoff, cells } => PartitionSpec::Uniform {
                cutoff: 2.0 * cutoff,
                cells: 4 * cells,
            },
            PartitionSpec::Layered { layers } => PartitionSpec::Layered {
                layers: refine_layers(layers),
            },
            PartitionSpec::Graded {
                split,
                per_octave,
                octaves,
                layers,
            } => PartitionSpec::Graded {
                split: *split,
                per_octave: 2 * per_octave,
                octaves: *octaves,
                layers: refine_layers(layers),
            },
        }
    }
}

/// Bound on `|h'|` over `[x0, x1]` for `h(x) = A (2/a) sinc(x/a)`.
///
/// `|sinc'(u)| <= u/3` (since `|sinc''| <= 1/3`), `<= 1/u + 1/u^2`, and
/// globally `<= 0.43619`.
#[inline]
pub(crate) fn sinc_slope(amp: f64, a: f64, x0: f64, x1: f64) -> f64 {
    let u0 = x0 / a;
    let u1 = x1 / a;
    let mut s = SINC_SLOPE_MAX.min(u1 / 3.0);
    if u0 > 0.0 {
        s = s.min(1.0 / u0 + 1.0 / (u0 * u0));
    }
    2.0 * amp / (a * a) * s
}

/// Per-cell `(lower, upper)` bounds on `|A · 2 sin(x/a)/x|` over the cells
/// of `nodes`.
pub fn enclose_sinc_cells(amp: f64, a: f64, nodes: &[f64], exec: Exec) -> (Vec<f64>, Vec<f64>) {
    let vals = exec.map_range(nodes.len(), |i| (amp * ft_indicator_1d(a, nodes[i])).abs());
    let peak = amp * 2.0 / a;
    let abs_slack = 8.0 * f64::EPSILON * peak;
    let bounds = exec.map_range(nodes.len() - 1, |i| {
        let (x0, x1) = (nodes[i], nodes[i + 1]);
        let (v0, v1) = (vals[i], vals[i + 1]);
        let l = sinc_slope(amp, a, x0, x1);
        let w = x1 - x0;
        let envelope = if x0 > 0.0 {
            peak.min(2.0 * amp / x0)
        } else {
            peak
        };
        let up = (0.5 * (v0 + v1 + l * w)).min(envelope);
        let lo = 0.5 * (v0 + v1 - l * w);
        let up = up * (1.0 + ROUNDING_SLACK) + abs_slack;
        let lo = (lo * (1.0 - ROUNDING_SLACK) - abs_slack).max(0.0).min(up);
        (lo, up)
    });
    bounds.into_iter().unzip()
}

/// Enclosure of `|A · 2 sin(x/a)/x|` on the given partition, with the tail
/// `|h(x)| <= 2A/|x|` beyond the last node.
pub fn sinc_enclosure(amp: f64, a: f64, nodes: Vec<f64>, exec: Exec) -> GridEnclosure {
    let (lower, upper) = enclose_sinc_cells(amp, a, &nodes, exec);
    GridEnclosure::from_parts_unchecked(nodes, lower, upper, 2.0 * amp)
}

/// Inputs for a reference computation of `c_p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub p: f64,
    pub partition: PartitionSpec,
    /// Fail with an unresolved error when the `c_p` bracket is wider.
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Admit `p = 2` (Parseval sanity mode).
    #[serde(default)]
    pub allow_boundary: bool,
}

/// Certified enclosure of `|F g_1|` and the derived `c_p` bracket.
#[derive(Clone, Debug)]
pub struct ReferenceProfile {
    pub spec: ProfileSpec,
    pub enclosure: GridEnclosure,
    pub rearrangement: RearrangementEnclosure,
    pub cp: Bracket,
}

/// Serializable digest of a [`ReferenceProfile`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub p: f64,
    pub cutoff: f64,
    pub cells: usize,
    pub tail_constant: f64,
    pub cp: Bracket,
    pub partition: PartitionSpec,
}

impl ReferenceProfile {
    pub fn p(&self) -> f64 {
        self.spec.p
    }

    pub fn index(&self) -> LorentzIndex {
        LorentzIndex::dual_pair(self.spec.p).expect("validated on construction")
    }

    /// `(2)^{-1/p}`, the amplitude of `F g_1` relative to `F f_1`.
    pub fn amplitude(&self) -> f64 {
        2f64.powf(-1.0 / self.spec.p)
    }

    pub fn summary(&self) -> ProfileSummary {
        ProfileSummary {
            p: self.spec.p,
            cutoff: self.enclosure.cutoff(),
            cells: self.enclosure.cells(),
            tail_constant: self.enclosure.tail_constant(),
            cp: self.cp,
            partition: self.spec.partition.clone(),
        }
    }
}

/// `‖F(A f_a)‖_{p',p}` bracket on the partition scaled by `a`.
fn scaled_norm(
    p: f64,
    amp: f64,
    a: f64,
    partition: &PartitionSpec,
    exec: Exec,
) -> Result<(GridEnclosure, RearrangementEnclosure, Bracket)> {
    let nodes: Vec<f64> = partition.nodes()?.into_iter().map(|x| a * x).collect();
    let enclosure = sinc_enclosure(amp, a, nodes, exec);
    let rearrangement = enclosure.rearrange(exec);
    let idx = LorentzIndex::dual_pair(p)?;
    let norm = lorentz_norm_enclosure(&rearrangement, idx, None)?;
    Ok((enclosure, rearrangement, norm))
}

pub fn build_profile(spec: &ProfileSpec, exec: Exec) -> Result<ReferenceProfile> {
    check_p(spec.p, spec.allow_boundary)?;
    let amp = 2f64.powf(-1.0 / spec.p);
    let (enclosure, rearrangement, cp) = scaled_norm(spec.p, amp, 1.0, &spec.partition, exec)?;
    if let Some(tol) = spec.tolerance {
        if cp.width() > tol {
            return Err(LabError::unresolved("c_p bracket width", cp.width(), tol));
        }
    }
    Ok(ReferenceProfile {
        spec: spec.clone(),
        enclosure,
        rearrangement,
        cp,
    })
}

/// Reference profile on `cells` equal cells of `[0, X]`.
pub fn reference_profile(p: f64, cutoff: f64, cells: usize) -> Result<ReferenceProfile> {
    build_profile(
        &ProfileSpec {
            p,
            partition: PartitionSpec::uniform(cutoff, cells),
            tolerance: None,
            allow_boundary: false,
        },
        Exec::default(),
    )
}

/// `‖F g_a‖_{p',p}` computed on the profile's grid dilated by `a`, with
/// every cell re-evaluated at scale `a`.
pub fn scaled_lorentz_identity_check(
    p: f64,
    a: f64,
    profile: &ReferenceProfile,
    exec: Exec,
) -> Result<Bracket> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(LabError::domain("a", format!("must be > 0, got {a}")));
    }
    check_p(p, profile.spec.allow_boundary)?;
    let amp = (2.0 / a).powf(-1.0 / p);
    let (_, _, b) = scaled_norm(p, amp, a, &profile.spec.partition, exec)?;
    if let Some(tol) = profile.spec.tolerance {
        if b.width() > tol {
            return Err(LabError::unresolved("scaled bracket width", b.width(), tol));
        }
    }
    Ok(b)
}

/// `‖F f_a‖_{p',p}` for the unnormalised indicator.
pub fn indicator_transform_norm(
    p: f64,
    a: f64,
    partition: &PartitionSpec,
    allow_boundary: bool,
    exec: Exec,
) -> Result<Bracket> {
    check_p(p, allow_boundary)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(LabError::domain("a", format!("must be > 0, got {a}")));
    }
    Ok(scaled_norm(p, 1.0, a, partition, exec)?.2)
}

/// Uncertified midpoint estimate of `c_{d,p} = ‖F g_1‖_{p',p}` on `R^d`,
/// sampling `[0, X]^d` at `cells` points per axis.
pub fn cube_constant_estimate(p: f64, d: usize, cutoff: f64, cells: usize) -> Result<f64> {
    check_p(p, false)?;
    if d == 0 || d > 3 {
        return Err(LabError::domain("d", "estimates are provided for d in 1..=3"));
    }
    if cells < 2 || cells.checked_pow(d as u32).map_or(true, |n| n > 1 << 24) {
        return Err(LabError::domain("cells", "need 2 <= cells and cells^d <= 2^24"));
    }
    let h = cutoff / cells as f64;
    let profile = SincProfile::new(1.0, p, d)?;
    let axis: Vec<f64> = (0..cells).map(|i| ft_indicator_1d(1.0, (i as f64 + 0.5) * h)).collect();
    let total = cells.pow(d as u32);
    let weight = (2.0 * h).powi(d as i32);
    let amp = profile.amplitude();
    let pairs = Exec::default().map_range(total, |mut k| {
        let mut v = amp;
        for _ in 0..d {
            v *= axis[k % cells];
            k /= cells;
        }
        (v.abs(), weight)
    });
    let r = StepRearrangement::from_weighted(pairs, Exec::default());
    Ok(lorentz_norm_step(&r, LorentzIndex::dual_pair(p)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_origin_is_indicator_mass() {
        for a in [0.5, 1.0, 3.0] {
            for d in 1..=3 {
                let v = eval_ft_indicator(a, &vec![0.0; d]).unwrap();
                assert!((v - (2.0 / a).powi(d as i32)).abs() < 1e-15);
            }
        }
        assert!(eval_ft_indicator(1.0, &[std::f64::consts::PI]).unwrap().abs() < 1e-15);
        assert!(eval_ft_indicator(0.0, &[1.0]).is_err());
    }

    #[test]
    fn scaling_and_evenness() {
        for a in [0.25, 2.0, 7.0] {
            for x in [0.3, 1.0, 13.7, -4.2] {
                let lhs = eval_ft_indicator(a, &[x]).unwrap();
                let rhs = eval_ft_indicator(1.0, &[x / a]).unwrap() / a;
                assert!((lhs - rhs).abs() < 1e-15 * (1.0 + lhs.abs()));
                assert_eq!(lhs, eval_ft_indicator(a, &[-x]).unwrap());
            }
        }
    }

    #[test]
    fn slope_bound_dominates_finite_differences() {
        let a = 1.0;
        let amp = 1.0;
        let h = 1e-5;
        for i in 0..20_000 {
            let x = i as f64 * 0.01;
            let fd = (ft_indicator_1d(a, x + h) - ft_indicator_1d(a, x)).abs() / h;
            assert!(fd <= sinc_slope(amp, a, x, x + h) * (1.0 + 1e-6) + 1e-9, "x = {x}");
        }
    }

    #[test]
    fn cell_bounds_contain_dense_samples() {
        let nodes = PartitionSpec::uniform(60.0, 600).nodes().unwrap();
        let (lo, up) = enclose_sinc_cells(0.7, 1.0, &nodes, Exec::Sequential);
        for i in 0..600 {
            for k in 0..=16 {
                let x = nodes[i] + (nodes[i + 1] - nodes[i]) * k as f64 / 16.0;
                let v = (0.7 * ft_indicator_1d(1.0, x)).abs();
                assert!(lo[i] <= v && v <= up[i], "cell {i}: {} <= {v} <= {}", lo[i], up[i]);
            }
            assert!(up[i] <= 0.7 * 2.0 * (1.0 + 1e-11));
        }
    }

    #[test]
    fn graded_partition_nests_under_refinement() {
        let spec = PartitionSpec::Graded {
            split: 0.5,
            per_octave: 2,
            octaves: 3,
            layers: vec![Layer { end: 2.0, step: 0.25 }, Layer { end: 4.0, step: 0.5 }],
        };
        let coarse = spec.nodes().unwrap();
        let fine = spec.refined().nodes().unwrap();
        assert_eq!(coarse[0], 0.0);
        assert_eq!(coarse[1], 0.0625);
        assert!(coarse.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*coarse.last().unwrap(), 4.0);
        assert_eq!(*fine.last().unwrap(), 8.0);
        for x in &coarse {
            assert!(fine.contains(x), "{x} missing from refined grid");
        }
        let bad = PartitionSpec::Layered {
            layers: vec![Layer { end: 1.0, step: 0.3 }],
        };
        assert!(bad.nodes().is_err());
    }

    #[test]
    fn profile_rejects_bad_p() {
        assert!(reference_profile(2.0, 10.0, 100).is_err());
        assert!(reference_profile(1.0, 10.0, 100).is_err());
        assert!(reference_profile(1.5, 10.0, 1).is_err());
        let tight = ProfileSpec {
            p: 1.5,
            partition: PartitionSpec::uniform(10.0, 100),
            tolerance: Some(1e-6),
            allow_boundary: false,
        };
        assert!(matches!(
            build_profile(&tight, Exec::Sequential),
            Err(LabError::Unresolved { .. })
        ));
    }

    #[test]
    fn unit_scale_reproduces_profile_bracket() {
        let prof = reference_profile(1.5, 50.0, 4096).unwrap();
        let b = scaled_lorentz_identity_check(1.5, 1.0, &prof, Exec::Sequential).unwrap();
        assert_eq!(b, prof.cp);
    }
}
