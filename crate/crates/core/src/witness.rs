// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! The lacunary witness family `φ_j = g_{a_j}`.
//!
//! Level `j` works at tolerance `γ_j = ε 2^{-j}` and fixes
//!
//! - `η_j`, so that `G_j = {η_j/a_j <= |t| < 1/a_j}` carries `φ_j` up to `γ_j`;
//! - a frequency window `Ĝ_j = {a_j ν^L_j <= |x| < a_j ν^R_j}` outside of
//!   which `F φ_j` has Lorentz norm at most `c_p γ_j / 2`;
//! - a window `I_j = (a_j δ^L_j, a_j δ^R_j)` on which the rearrangement of
//!   `F φ_j χ_{Ĝ_j}` still integrates to at least `c_p (1 - γ_j)`.
//!
//! Because `F g_a(x) = a^{-1/p'} F g_1(x/a)`, every frequency-side quantity
//! is computed once on the reference profile at `a = 1` and carried to
//! scale `a_j` by dilation. Scales are exact rationals, and the three
//! families of sets are checked for pairwise disjointness exactly.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bracket::Bracket;
use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::fourier::{build_profile, Layer, PartitionSpec, ProfileSpec, ProfileSummary, ReferenceProfile};
use crate::lorentz::{lorentz_norm_enclosure, lp_norm_pc, power_increment, PowerPrefix};
use crate::measure::{Interval, PiecewiseConstantFn};

/// Which constraint fixes `η`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaRule {
    /// Only `‖g_1 χ_{η <= |t| <= 1}‖_p >= 1 - γ`, i.e. `η <= 1 - (1-γ)^p`.
    MassOnly,
    /// Additionally `‖g_1 χ_{|t| < η}‖_p <= γ`, i.e. `η <= γ^p`.
    TwoSided,
}

fn check_p_gamma(p: f64, gamma: f64) -> Result<()> {
    if !(p > 1.0 && p < 2.0) {
        return Err(LabError::domain("p", format!("must lie in (1, 2), got {p}")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(LabError::domain("gamma", format!("must lie in (0, 1), got {gamma}")));
    }
    Ok(())
}

/// Largest admissible `η` under `rule`, shrunk by `safety`.
pub fn find_eta_with(p: f64, gamma: f64, rule: EtaRule, safety: f64) -> Result<f64> {
    check_p_gamma(p, gamma)?;
    if !(safety > 0.0 && safety < 1.0) {
        return Err(LabError::domain("safety", format!("must lie in (0, 1), got {safety}")));
    }
    // ‖g_1 χ_{η<=|t|<=1}‖_p^p = 1 - η.
    let mass = -(p * (-gamma).ln_1p()).exp_m1();
    let star = match rule {
        EtaRule::MassOnly => mass,
        EtaRule::TwoSided => mass.min(gamma.powf(p)),
    };
    Ok(safety * star)
}

/// `0.99 · (1 - (1-γ)^p)`.
pub fn find_eta(p: f64, gamma: f64) -> Result<f64> {
    find_eta_with(p, gamma, EtaRule::MassOnly, 0.99)
}

/// `0.99 · min(1 - (1-γ)^p, γ^p)`; also keeps `‖g_1 χ_{|t|<η}‖_p <= γ`.
pub fn find_eta_strict(p: f64, gamma: f64) -> Result<f64> {
    find_eta_with(p, gamma, EtaRule::TwoSided, 0.99)
}

/// Resolution and margin choices for building and verifying a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessPolicy {
    pub partition: PartitionSpec,
    pub eta_rule: EtaRule,
    pub eta_safety: f64,
    pub scale_margin: f64,
    pub max_denominator: u64,
    /// Starting frequency window `(ν^L, ν^R)`; both must be grid nodes.
    pub seed_window: (f64, f64),
    /// Fraction of the `p`-th power slack given to each side of `I_j`.
    pub slack_split: f64,
}

impl Default for WitnessPolicy {
    fn default() -> Self {
        WitnessPolicy {
            partition: PartitionSpec::Graded {
                split: 1.0 / 16.0,
                per_octave: 4,
                octaves: 64,
                layers: vec![
                    Layer {
                        end: 64.0,
                        step: 1.0 / 256.0,
                    },
                    Layer {
                        end: 8192.0,
                        step: 1.0 / 32.0,
                    },
                ],
            },
            eta_rule: EtaRule::TwoSided,
            eta_safety: 0.99,
            scale_margin: 1.0 + 1e-3,
            max_denominator: 1,
            seed_window: (1.0 / 16.0, 16.0),
            slack_split: 0.45,
        }
    }
}

impl WitnessPolicy {
    /// Same margins on the refined partition.
    pub fn refined(&self) -> Self {
        WitnessPolicy {
            partition: self.partition.refined(),
            ..self.clone()
        }
    }

    pub fn profile_spec(&self, p: f64) -> ProfileSpec {
        ProfileSpec {
            p,
            partition: self.partition.clone(),
            tolerance: None,
            allow_boundary: false,
        }
    }

    fn validate(&self) -> Result<()> {
        self.partition.validate()?;
        if !(self.eta_safety > 0.0 && self.eta_safety < 1.0) {
            return Err(LabError::domain("eta_safety", "must lie in (0, 1)"));
        }
        if !(self.scale_margin > 1.0 && self.scale_margin.is_finite()) {
            return Err(LabError::domain("scale_margin", "must be > 1"));
        }
        if self.max_denominator == 0 {
            return Err(LabError::domain("max_denominator", "must be >= 1"));
        }
        if !(self.slack_split > 0.0 && self.slack_split < 0.5) {
            return Err(LabError::domain("slack_split", "must lie in (0, 0.5)"));
        }
        let (l, r) = self.seed_window;
        if !(l > 0.0 && l < r) {
            return Err(LabError::domain("seed_window", "need 0 < nu_l < nu_r"));
        }
        Ok(())
    }
}

/// A certified frequency window on the reference grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyWindow {
    pub nu_l: f64,
    pub nu_r: f64,
    /// Node indices of `ν^L` and `ν^R` in the profile partition.
    pub il: usize,
    pub ir: usize,
    /// Bracket on `‖F g_1 χ_{|x| < ν^L or |x| >= ν^R}‖_{p',p}`.
    pub off: Bracket,
}

/// Upper `s`-th powers of the off-window part for many windows without
/// re-sorting: the cells are sorted once by their tail-lifted upper bound.
struct OffWindowSearch<'a> {
    nodes: &'a [f64],
    order: Vec<u32>,
    lifted: Vec<f64>,
    alpha: f64,
    floor_s: f64,
    two_x: f64,
    tail_power: f64,
}

impl<'a> OffWindowSearch<'a> {
    fn new(profile: &'a ReferenceProfile, exec: Exec) -> Result<Self> {
        let enc = &profile.enclosure;
        let idx = profile.index();
        let x = enc.cutoff();
        let floor = enc.tail_constant() / x;
        let n = enc.cells();
        let lifted = exec.map_range(n, |i| enc.upper()[i].max(floor).powf(idx.s));
        let mut keyed: Vec<(f64, f64)> = (0..n).map(|i| (lifted[i], -(i as f64))).collect();
        exec.sort_pairs_desc(&mut keyed);
        let order = keyed.into_iter().map(|(_, i)| (-i) as u32).collect();
        // ∫_{2X}^∞ t^{α-1} (2C/t)^s dt with α - s = -1 for (p', p).
        let e = idx.alpha() - idx.s;
        if e >= 0.0 {
            return Err(LabError::Unsupported("tail not integrable".into()));
        }
        let d = 2.0 * enc.tail_constant();
        let tail_power = d.powf(idx.s) * (2.0 * x).powf(e) / (-e);
        Ok(OffWindowSearch {
            nodes: enc.nodes(),
            order,
            lifted,
            alpha: idx.alpha(),
            floor_s: floor.powf(idx.s),
            two_x: 2.0 * x,
            tail_power,
        })
    }

    /// `(low-side power, high-side power, total off-window power)`.
    fn parts(&self, il: usize, ir: usize) -> (f64, f64, f64) {
        let (mut t, mut tl, mut th) = (0.0, 0.0, 0.0);
        let (mut total, mut low, mut high) = (0.0, 0.0, 0.0);
        for &i in &self.order {
            let i = i as usize;
            if i >= il && i < ir {
                continue;
            }
            let w = 2.0 * (self.nodes[i + 1] - self.nodes[i]);
            let v = self.lifted[i];
            total += v * power_increment(t, t + w, self.alpha);
            t += w;
            if i < il {
                low += v * power_increment(tl, tl + w, self.alpha);
                tl += w;
            } else {
                high += v * power_increment(th, th + w, self.alpha);
                th += w;
            }
        }
        total += self.floor_s * power_increment(t, self.two_x, self.alpha) + self.tail_power;
        (low, high + self.tail_power, total)
    }
}

fn off_window_keep(nu_l: f64, nu_r: f64) -> [Interval; 2] {
    [
        Interval { lo: 0.0, hi: nu_l },
        Interval {
            lo: nu_r,
            hi: f64::INFINITY,
        },
    ]
}

/// Certified bracket on the off-window Lorentz norm of `F g_1`.
pub fn off_window_norm(
    profile: &ReferenceProfile,
    nu_l: f64,
    nu_r: f64,
    exec: Exec,
) -> Result<Bracket> {
    let restricted = profile.enclosure.restrict(&off_window_keep(nu_l, nu_r));
    lorentz_norm_enclosure(&restricted.rearrange(exec), profile.index(), None)
}

fn check_profile_p(p: f64, profile: &ReferenceProfile) -> Result<()> {
    if p != profile.p() {
        return Err(LabError::domain(
            "p",
            format!("profile was built for p = {}, not {p}", profile.p()),
        ));
    }
    Ok(())
}

/// Window `(ν^L, ν^R)` whose complement carries at most `c_p^{lo} γ / 2` of
/// the Lorentz norm of `F g_1`.
///
/// Starts from `(1/16, 16)`, halves `ν^L` or doubles `ν^R` (whichever side
/// currently weighs more) until the bound certifies, then bisects each side
/// back between its last failing and first passing grid node.
pub fn find_frequency_window(
    p: f64,
    gamma: f64,
    profile: &ReferenceProfile,
    exec: Exec,
) -> Result<FrequencyWindow> {
    find_frequency_window_from(p, gamma, profile, (1.0 / 16.0, 16.0), None, exec)
}

/// Like [`find_frequency_window`] but the result strictly contains `outer`
/// (used for consecutive levels, so windows grow as `γ` shrinks).
pub fn find_frequency_window_nested(
    p: f64,
    gamma: f64,
    profile: &ReferenceProfile,
    seed: (f64, f64),
    outer: Option<&FrequencyWindow>,
    exec: Exec,
) -> Result<FrequencyWindow> {
    find_frequency_window_from(p, gamma, profile, seed, outer, exec)
}

fn node_index(nodes: &[f64], x: f64) -> Result<usize> {
    let i = nodes.partition_point(|&n| n < x);
    if i < nodes.len() && nodes[i] == x && i > 0 {
        Ok(i)
    } else {
        Err(LabError::domain("seed_window", format!("{x} is not a positive grid node")))
    }
}

fn find_frequency_window_from(
    p: f64,
    gamma: f64,
    profile: &ReferenceProfile,
    seed: (f64, f64),
    outer: Option<&FrequencyWindow>,
    exec: Exec,
) -> Result<FrequencyWindow> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(LabError::domain("gamma", format!("must lie in (0, 1], got {gamma}")));
    }
    check_profile_p(p, profile)?;
    let nodes = profile.enclosure.nodes();
    let last = nodes.len() - 1;
    let idx = profile.index();
    let target = profile.cp.lo * gamma / 2.0;
    // Keep a hair of room for the certified re-evaluation.
    let target_pow = target.powf(idx.s) * (1.0 - 1e-9);

    let (mut il, mut ir) = match outer {
        Some(w) => {
            if w.il <= 1 || w.ir >= last {
                return Err(LabError::unresolved(
                    "frequency window reached the grid boundary",
                    w.off.hi,
                    target,
                ));
            }
            (w.il - 1, w.ir + 1)
        }
        None => (node_index(nodes, seed.0)?, node_index(nodes, seed.1)?),
    };
    if il >= ir {
        return Err(LabError::domain("seed_window", "need nu_l < nu_r"));
    }

    let search = OffWindowSearch::new(profile, exec)?;
    let passes = |il: usize, ir: usize| search.parts(il, ir).2 <= target_pow;
    let shrink = |il: usize| {
        let j = nodes.partition_point(|&n| n <= 0.5 * nodes[il]);
        (j >= 2).then(|| j - 1)
    };
    let grow = |ir: usize| {
        let j = nodes.partition_point(|&n| n < 2.0 * nodes[ir]);
        (j <= last).then_some(j)
    };

    let (mut fail_l, mut fail_r) = (None, None);
    loop {
        let (low, high, total) = search.parts(il, ir);
        if total <= target_pow {
            break;
        }
        let next_l = shrink(il);
        let next_r = grow(ir);
        match (next_l, next_r) {
            (Some(l), _) if low >= high || next_r.is_none() => {
                fail_l = Some(il);
                il = l;
            }
            (_, Some(r)) => {
                fail_r = Some(ir);
                ir = r;
            }
            _ => {
                return Err(LabError::unresolved(
                    format!("frequency window at gamma = {gamma}"),
                    total.powf(1.0 / idx.s),
                    target,
                ))
            }
        }
    }
    if let Some(f) = fail_l {
        let (mut lo, mut hi) = (il, f);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if passes(mid, ir) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        il = lo;
    }
    if let Some(f) = fail_r {
        let (mut lo, mut hi) = (f, ir);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if passes(il, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        ir = hi;
    }

    let (nu_l, nu_r) = (nodes[il], nodes[ir]);
    let off = off_window_norm(profile, nu_l, nu_r, exec)?;
    if off.hi > target {
        return Err(LabError::unresolved(
            format!("frequency window at gamma = {gamma}"),
            off.hi,
            target,
        ));
    }
    Ok(FrequencyWindow {
        nu_l,
        nu_r,
        il,
        ir,
        off,
    })
}

/// A certified rearrangement window on the reference grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RearrangementWindow {
    pub delta_l: f64,
    pub delta_r: f64,
    /// Bracket on `(∫_{δ^L}^{δ^R} (t^{1/p'} (F g_1 χ_window)^*)^p dt/t)^{1/p}`.
    pub windowed: Bracket,
}

/// In-window enclosure pieces: full norm and the windowed norm.
fn in_window_norms(
    profile: &ReferenceProfile,
    nu_l: f64,
    nu_r: f64,
    deltas: Option<(f64, f64)>,
    exec: Exec,
) -> Result<(Bracket, Option<Bracket>)> {
    let restricted = profile
        .enclosure
        .restrict(&[Interval { lo: nu_l, hi: nu_r }]);
    let r = restricted.rearrange(exec);
    let idx = profile.index();
    let full = lorentz_norm_enclosure(&r, idx, None)?;
    let windowed = deltas
        .map(|d| lorentz_norm_enclosure(&r, idx, Some(d)))
        .transpose()?;
    Ok((full, windowed))
}

/// `(δ^L, δ^R)` with the certified windowed integral of the in-window
/// rearrangement at least `c_p^{hi} (1 - γ)`.
///
/// The `p`-th power slack above the target is split between the two ends;
/// each end is found by bisection on prefix integrals and the result is
/// re-verified by direct integration.
pub fn find_rearrangement_window(
    p: f64,
    gamma: f64,
    profile: &ReferenceProfile,
    window: &FrequencyWindow,
    slack_split: f64,
    exec: Exec,
) -> Result<RearrangementWindow> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(LabError::domain("gamma", format!("must lie in (0, 1], got {gamma}")));
    }
    if !(slack_split > 0.0 && slack_split < 0.5) {
        return Err(LabError::domain("slack_split", "must lie in (0, 0.5)"));
    }
    check_profile_p(p, profile)?;
    let idx = profile.index();
    let restricted = profile.enclosure.restrict(&[Interval {
        lo: window.nu_l,
        hi: window.nu_r,
    }]);
    let r = restricted.rearrange(exec);
    let prefix = PowerPrefix::new(&r.lower, idx);
    let target = profile.cp.hi * (1.0 - gamma);
    let target_pow = target.powf(idx.s);
    let slack = prefix.total() - target_pow;
    if !(slack > 0.0) {
        return Err(LabError::unresolved(
            format!("rearrangement window at gamma = {gamma}"),
            prefix.total().powf(1.0 / idx.s),
            target,
        ));
    }
    let budget = slack_split * slack;
    let support = r
        .lower
        .total_measure()
        .min(2.0 * (window.nu_r - window.nu_l))
        * (1.0 - 1.0 / (1u64 << 20) as f64);

    // δ^L: largest with ∫_0^δ <= budget, bisected in log scale.
    let (mut lo, mut hi) = ((support * 1e-300).max(f64::MIN_POSITIVE).ln(), support.ln());
    if prefix.up_to(support) <= budget {
        lo = hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if prefix.up_to(mid.exp()) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta_l = lo.exp();
    // δ^R: smallest with ∫_δ^∞ <= budget.
    let total = prefix.total();
    let (mut lo, mut hi) = (delta_l, support);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total - prefix.up_to(mid) <= budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let delta_r = hi;
    if !(delta_l > 0.0 && delta_l < delta_r) {
        return Err(LabError::unresolved(
            format!("rearrangement window at gamma = {gamma}"),
            delta_r - delta_l,
            0.0,
        ));
    }
    let windowed = lorentz_norm_enclosure(&r, idx, Some((delta_l, delta_r)))?;
    if windowed.lo < target {
        return Err(LabError::unresolved(
            format!("rearrangement window at gamma = {gamma}"),
            windowed.lo,
            target,
        ));
    }
    Ok(RearrangementWindow {
        delta_l,
        delta_r,
        windowed,
    })
}

/// Smallest rational with denominator at most `q` that is `>= x`.
pub fn ceil_rational(x: &BigRational, q: u64) -> BigRational {
    if x.is_integer() {
        return x.clone();
    }
    let q = BigInt::from(q.max(1));
    let fl = x.floor().to_integer();
    let (mut ln, mut ld) = (fl.clone(), BigInt::one());
    let (mut hn, mut hd) = (fl + 1, BigInt::one());
    let xn = x.numer();
    let xd = x.denom();
    loop {
        // Move the upper end: largest k with (hn + k ln)/(hd + k ld) >= x.
        //   k <= (hn xd - xn hd) / (xn ld - ln xd)
        let num_h: BigInt = &hn * xd - xn * &hd;
        let den_h: BigInt = xn * &ld - &ln * xd;
        let mut kh = num_h.div_floor(&den_h);
        let cap_h = (&q - &hd).div_floor(&ld);
        if kh > cap_h {
            kh = cap_h;
        }
        if kh.is_positive() {
            hn += &kh * &ln;
            hd += &kh * &ld;
            if &hn * xd == xn * &hd {
                break;
            }
        }
        // Move the lower end: largest k with (ln + k hn)/(ld + k hd) < x.
        //   k < (xn ld - ln xd) / (hn xd - xn hd)
        let num_l: BigInt = xn * &ld - &ln * xd;
        let den_l: BigInt = &hn * xd - xn * &hd;
        let mut kl = (num_l - BigInt::one()).div_floor(&den_l);
        let cap_l = (&q - &ld).div_floor(&hd);
        if kl > cap_l {
            kl = cap_l;
        }
        if kl.is_positive() {
            ln += &kl * &hn;
            ld += &kl * &hd;
        }
        if !kh.is_positive() && !kl.is_positive() {
            break;
        }
    }
    BigRational::new(hn, hd)
}

/// Exact rational value of a finite float.
pub fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Thresholds of the level being added, as used by [`next_scale`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NextThresholds {
    pub eta: f64,
    pub nu_l: f64,
    pub delta_l: f64,
}

/// `a_next >= margin · a_prev · max{1/η_prev, ν^R_prev/ν^L_next, δ^R_prev/δ^L_next}`,
/// rounded up to the nearest rational with denominator at most `q`.
pub fn next_scale(
    prev: &WitnessLevel,
    next: NextThresholds,
    margin: f64,
    q: u64,
) -> Result<BigRational> {
    if !(margin > 1.0 && margin.is_finite()) {
        return Err(LabError::domain("margin", format!("must be > 1, got {margin}")));
    }
    for (name, v) in [("eta", next.eta), ("nu_l", next.nu_l), ("delta_l", next.delta_l)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(LabError::domain("thresholds", format!("{name} must be > 0, got {v}")));
        }
    }
    let candidates = [
        exact(prev.eta).recip(),
        exact(prev.nu_r) / exact(next.nu_l),
        exact(prev.delta_r) / exact(next.delta_l),
    ];
    let factor = candidates.into_iter().max().expect("three candidates");
    let target = exact(margin) * &prev.a * factor;
    Ok(ceil_rational(&target, q))
}

mod rational_string {
    use super::*;
    use serde::{de::Error, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_rational(&s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let mut it = s.splitn(2, '/');
    let n: BigInt = it.next()?.trim().parse().ok()?;
    let d: BigInt = match it.next() {
        Some(d) => d.trim().parse().ok()?,
        None => BigInt::one(),
    };
    (!d.is_zero()).then(|| BigRational::new(n, d))
}

/// Certified quantities of one level, all at the reference scale except the
/// time-side masses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelCertificate {
    /// `‖φ_j χ_{G_j}‖_p`.
    pub g_mass: Bracket,
    /// `‖φ_j χ_{E_j}‖_p`.
    pub e_mass: Bracket,
    /// Lorentz norm of `F φ_j` off `Ĝ_j`.
    pub off_window: Bracket,
    /// Lorentz norm of `F φ_j χ_{Ĝ_j}`.
    pub in_window: Bracket,
    /// Windowed integral over `I_j` of `(F φ_j χ_{Ĝ_j})^*`, in norm units.
    pub windowed: Bracket,
    /// `c_p` bracket the margins were computed against.
    pub cp: Bracket,
    /// `g_mass.lo - (1 - γ)`.
    pub mass_margin: f64,
    /// `c_p^{lo} γ / 2 - off_window.hi`.
    pub off_margin: f64,
    /// `windowed.lo - c_p^{hi} (1 - γ)`.
    pub window_margin: f64,
    /// `γ - e_mass.hi`; positive under [`EtaRule::TwoSided`].
    pub e_margin: f64,
}

impl LevelCertificate {
    /// The three per-level inequalities hold with positive margin.
    pub fn is_certified(&self) -> bool {
        self.mass_margin > 0.0 && self.off_margin > 0.0 && self.window_margin > 0.0
    }
}

/// One level `φ_j = g_{a_j}` with its thresholds and certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessLevel {
    pub j: usize,
    pub gamma: f64,
    #[serde(with = "rational_string")]
    pub a: BigRational,
    pub eta: f64,
    pub nu_l: f64,
    pub nu_r: f64,
    pub delta_l: f64,
    pub delta_r: f64,
    pub certificate: LevelCertificate,
}

/// Exact endpoints `[lo, hi)` of one of the level sets, on `[0, ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RationalInterval {
    pub fn disjoint(&self, other: &RationalInterval) -> bool {
        self.hi <= other.lo || other.hi <= self.lo
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

impl WitnessLevel {
    pub fn a_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::INFINITY)
    }

    /// `G_j ∩ [0, ∞) = [η/a, 1/a)`.
    pub fn g_set(&self) -> RationalInterval {
        let inv = self.a.recip();
        RationalInterval {
            lo: exact(self.eta) * &inv,
            hi: inv,
        }
    }

    /// `Ĝ_j ∩ [0, ∞) = [a ν^L, a ν^R)`.
    pub fn ghat_set(&self) -> RationalInterval {
        RationalInterval {
            lo: &self.a * exact(self.nu_l),
            hi: &self.a * exact(self.nu_r),
        }
    }

    /// `I_j = (a δ^L, a δ^R)`.
    pub fn i_set(&self) -> RationalInterval {
        RationalInterval {
            lo: &self.a * exact(self.delta_l),
            hi: &self.a * exact(self.delta_r),
        }
    }

    /// `φ_j = (2/a)^{-1/p} χ_[-1/a, 1/a]`.
    pub fn phi(&self, p: f64) -> Result<PiecewiseConstantFn> {
        let a = self.a_f64();
        PiecewiseConstantFn::indicator(Interval::new(-1.0 / a, 1.0 / a)?, (2.0 / a).powf(-1.0 / p))
    }
}

/// Recomputes all certified quantities of a level from its thresholds.
pub fn certify_level(
    p: f64,
    gamma: f64,
    a: &BigRational,
    eta: f64,
    window: (f64, f64),
    deltas: (f64, f64),
    profile: &ReferenceProfile,
    exec: Exec,
) -> Result<LevelCertificate> {
    check_profile_p(p, profile)?;
    let af = a.to_f64().filter(|v| v.is_finite() && *v > 0.0).ok_or_else(|| {
        LabError::domain("a", "scale must be a positive rational representable as f64")
    })?;
    let height = (2.0 / af).powf(-1.0 / p);
    let g = PiecewiseConstantFn::new(vec![
        (Interval::new(-1.0 / af, -eta / af)?, height),
        (Interval::new(eta / af, 1.0 / af)?, height),
    ])?;
    let e = PiecewiseConstantFn::indicator(Interval::new(-eta / af, eta / af)?, height)?;
    let g_mass = Bracket::point(lp_norm_pc(&g, p)?).outward();
    let e_mass = Bracket::point(lp_norm_pc(&e, p)?).outward();
    let off_window = off_window_norm(profile, window.0, window.1, exec)?;
    let (in_window, windowed) = in_window_norms(profile, window.0, window.1, Some(deltas), exec)?;
    let windowed = windowed.expect("requested");
    let cp = profile.cp;
    Ok(LevelCertificate {
        g_mass,
        e_mass,
        off_window,
        in_window,
        windowed,
        cp,
        mass_margin: g_mass.lo - (1.0 - gamma),
        off_margin: cp.lo * gamma / 2.0 - off_window.hi,
        window_margin: windowed.lo - cp.hi * (1.0 - gamma),
        e_margin: gamma - e_mass.hi,
    })
}

/// A built family with its certificates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessFamily {
    pub p: f64,
    pub epsilon: f64,
    pub d: usize,
    pub cp: Bracket,
    pub profile: ProfileSummary,
    pub policy: WitnessPolicy,
    pub levels: Vec<WitnessLevel>,
}

impl WitnessFamily {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn is_certified(&self) -> bool {
        self.levels.iter().all(|l| l.certificate.is_certified()) && self.disjointness().is_ok()
    }

    /// Exact pairwise disjointness of `G_j`, `Ĝ_j` and `I_j`.
    pub fn disjointness(&self) -> Result<()> {
        check_disjoint(&self.levels)
    }

    pub fn certificate(&self) -> WitnessCertificate {
        WitnessCertificate {
            format: CERTIFICATE_FORMAT.to_string(),
            version: CERTIFICATE_VERSION,
            family: self.clone(),
        }
    }
}

fn check_disjoint(levels: &[WitnessLevel]) -> Result<()> {
    for (j, lj) in levels.iter().enumerate() {
        for lk in &levels[j + 1..] {
            let pairs = [
                ("G", lj.g_set(), lk.g_set()),
                ("Ghat", lj.ghat_set(), lk.ghat_set()),
                ("I", lj.i_set(), lk.i_set()),
            ];
            for (name, a, b) in pairs {
                if !a.disjoint(&b) {
                    return Err(LabError::Uncertified(format!(
                        "{name} sets of levels {} and {} overlap: {a} vs {b}",
                        lj.j, lk.j
                    )));
                }
            }
        }
    }
    Ok(())
}

pub const CERTIFICATE_FORMAT: &str = "lorentz-lab/witness-certificate";
pub const CERTIFICATE_VERSION: u32 = 1;

/// Serialized family with a format tag; hashed for provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    pub format: String,
    pub version: u32,
    pub family: WitnessFamily,
}

impl WitnessCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cert: WitnessCertificate = serde_json::from_str(s)
            .map_err(|e| LabError::Validation(format!("bad certificate: {e}")))?;
        if cert.format != CERTIFICATE_FORMAT || cert.version != CERTIFICATE_VERSION {
            return Err(LabError::Validation(format!(
                "unsupported certificate {} v{}",
                cert.format, cert.version
            )));
        }
        Ok(cert)
    }

    /// Hex SHA-256 of the pretty JSON encoding.
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

/// Builds and certifies `J` levels at `p` and `ε`.
pub fn build_family(
    p: f64,
    epsilon: f64,
    levels: usize,
    policy: &WitnessPolicy,
    exec: Exec,
) -> Result<WitnessFamily> {
    Ok(build_family_with_profile(p, epsilon, levels, policy, exec)?.0)
}

/// [`build_family`], also returning the reference profile it used.
pub fn build_family_with_profile(
    p: f64,
    epsilon: f64,
    levels: usize,
    policy: &WitnessPolicy,
    exec: Exec,
) -> Result<(WitnessFamily, ReferenceProfile)> {
    if !(p > 1.0 && p < 2.0) {
        return Err(LabError::domain("p", format!("must lie in (1, 2), got {p}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(LabError::domain("epsilon", format!("must lie in (0, 1), got {epsilon}")));
    }
    if levels == 0 {
        return Err(LabError::domain("levels", "need at least one level"));
    }
    policy.validate()?;
    let profile = build_profile(&policy.profile_spec(p), exec)?;

    let mut built: Vec<WitnessLevel> = Vec::with_capacity(levels);
    let mut prev_window: Option<FrequencyWindow> = None;
    for j in 1..=levels {
        let gamma = epsilon * 0.5f64.powi(j as i32);
        let at_level = |e: LabError| match e {
            LabError::Unresolved {
                context,
                achieved,
                required,
            } => LabError::Unresolved {
                context: format!("level {j}: {context}"),
                achieved,
                required,
            },
            other => other,
        };
        let eta = find_eta_with(p, gamma, policy.eta_rule, policy.eta_safety)?;
        let window = find_frequency_window_nested(
            p,
            gamma,
            &profile,
            policy.seed_window,
            prev_window.as_ref(),
            exec,
        )
        .map_err(at_level)?;
        let rw = find_rearrangement_window(p, gamma, &profile, &window, policy.slack_split, exec)
            .map_err(at_level)?;
        let a = match built.last() {
            None => BigRational::one(),
            Some(prev) => next_scale(
                prev,
                NextThresholds {
                    eta,
                    nu_l: window.nu_l,
                    delta_l: rw.delta_l,
                },
                policy.scale_margin,
                policy.max_denominator,
            )?,
        };
        let certificate = certify_level(
            p,
            gamma,
            &a,
            eta,
            (window.nu_l, window.nu_r),
            (rw.delta_l, rw.delta_r),
            &profile,
            exec,
        )?;
        if !certificate.is_certified() {
            return Err(LabError::Uncertified(format!(
                "level {j}: margins mass {:.3e}, off-window {:.3e}, windowed {:.3e}",
                certificate.mass_margin, certificate.off_margin, certificate.window_margin
            )));
        }
        built.push(WitnessLevel {
            j,
            gamma,
            a,
            eta,
            nu_l: window.nu_l,
            nu_r: window.nu_r,
            delta_l: rw.delta_l,
            delta_r: rw.delta_r,
            certificate,
        });
        prev_window = Some(window);
    }
    check_disjoint(&built)?;
    let family = WitnessFamily {
        p,
        epsilon,
        d: 1,
        cp: profile.cp,
        profile: profile.summary(),
        policy: policy.clone(),
        levels: built,
    };
    Ok((family, profile))
}

/// Outcome of re-certifying a family's stored thresholds on another grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyVerification {
    pub profile: ProfileSummary,
    pub levels: Vec<LevelCertificate>,
    pub disjoint: bool,
    /// Every margin positive in the original is positive here too.
    pub signs_preserved: bool,
}

impl FamilyVerification {
    pub fn passed(&self) -> bool {
        self.disjoint && self.signs_preserved && self.levels.iter().all(LevelCertificate::is_certified)
    }
}

/// Re-certifies every level on the partition of `policy` (typically
/// [`WitnessPolicy::refined`]) without searching again.
pub fn verify_family(
    family: &WitnessFamily,
    policy: &WitnessPolicy,
    exec: Exec,
) -> Result<FamilyVerification> {
    let profile = build_profile(&policy.profile_spec(family.p), exec)?;
    let mut levels = Vec::with_capacity(family.levels.len());
    let mut signs_preserved = true;
    for lvl in &family.levels {
        let cert = certify_level(
            family.p,
            lvl.gamma,
            &lvl.a,
            lvl.eta,
            (lvl.nu_l, lvl.nu_r),
            (lvl.delta_l, lvl.delta_r),
            &profile,
            exec,
        )?;
        let old = &lvl.certificate;
        let same = |a: f64, b: f64| (a > 0.0) == (b > 0.0);
        signs_preserved &= same(old.mass_margin, cert.mass_margin)
            && same(old.off_margin, cert.off_margin)
            && same(old.window_margin, cert.window_margin)
            && same(old.e_margin, cert.e_margin);
        levels.push(cert);
    }
    Ok(FamilyVerification {
        profile: profile.summary(),
        levels,
        disjoint: family.disjointness().is_ok(),
        signs_preserved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_closed_forms() {
        let star = find_eta(1.5, 0.125).unwrap() / 0.99;
        assert!((star - (1.0 - 0.875f64.powf(1.5))).abs() < 1e-15);
        assert!((star - 0.18152).abs() < 1e-5);
        let star = find_eta(1.5, 0.5).unwrap() / 0.99;
        assert!((star - 0.64645).abs() < 1e-5);
        assert!(find_eta(1.5, 1e-9).unwrap() < 1e-8);
        let strict = find_eta_strict(1.5, 0.125).unwrap() / 0.99;
        assert!((strict - 0.125f64.powf(1.5)).abs() < 1e-15);
        assert!(find_eta(2.5, 0.1).is_err());
        assert!(find_eta(1.5, 0.0).is_err());
        assert!(find_eta(1.5, 1.0).is_err());
    }

    #[test]
    fn ceil_rational_examples() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(ceil_rational(&r(7, 2), 1), r(4, 1));
        assert_eq!(ceil_rational(&r(7, 2), 2), r(7, 2));
        assert_eq!(ceil_rational(&r(5, 1), 1), r(5, 1));
        // 0.33 with denominators <= 3: 1/3.
        assert_eq!(ceil_rational(&r(33, 100), 3), r(1, 3));
        // 1 + 1e-6 with a large denominator stays close.
        let x = r(1_000_001, 1_000_000);
        let c = ceil_rational(&x, 10_000_000);
        assert!(c >= x && c.to_f64().unwrap() - 1.000001 < 1e-12);
        // Brute-force oracle on small denominators.
        for n in 1..60i64 {
            for d in 1..25i64 {
                let x = r(n, d);
                for q in 1..12u64 {
                    let mut best: Option<BigRational> = None;
                    for den in 1..=q as i64 {
                        let num = (n * den + d - 1) / d;
                        let c = r(num, den);
                        if best.as_ref().map_or(true, |b| c < *b) {
                            best = Some(c);
                        }
                    }
                    assert_eq!(ceil_rational(&x, q), best.unwrap(), "x = {n}/{d}, q = {q}");
                }
            }
        }
    }

    fn unit_level() -> WitnessLevel {
        let b = Bracket::point(1.0);
        WitnessLevel {
            j: 1,
            gamma: 0.5,
            a: BigRational::one(),
            eta: 1.0,
            nu_l: 1.0,
            nu_r: 1.0,
            delta_l: 1.0,
            delta_r: 1.0,
            certificate: LevelCertificate {
                g_mass: b,
                e_mass: b,
                off_window: b,
                in_window: b,
                windowed: b,
                cp: b,
                mass_margin: 0.0,
                off_margin: 0.0,
                window_margin: 0.0,
                e_margin: 0.0,
            },
        }
    }

    #[test]
    fn next_scale_unit_thresholds() {
        let prev = unit_level();
        let next = NextThresholds {
            eta: 1.0,
            nu_l: 1.0,
            delta_l: 1.0,
        };
        let a = next_scale(&prev, next, 1.0 + 1e-6, 100_000_000).unwrap();
        let af = a.to_f64().unwrap();
        assert!(af >= 1.0 + 1e-6 && af < 1.0 + 1.1e-6, "{af}");
        assert_eq!(next_scale(&prev, next, 1.0 + 1e-6, 1).unwrap(), BigRational::from_integer(2.into()));
        assert!(next_scale(&prev, next, 1.0, 1).is_err());
    }

    #[test]
    fn next_scale_respects_eta() {
        let mut prev = unit_level();
        prev.eta = find_eta(1.5, 0.125).unwrap() / 0.99;
        let next = NextThresholds {
            eta: 0.1,
            nu_l: 1.0,
            delta_l: 1.0,
        };
        let a = next_scale(&prev, next, 1.0 + 1e-3, 1).unwrap();
        assert!(a.to_f64().unwrap() >= 1.0 / 0.1815);
    }

    #[test]
    fn rational_round_trip() {
        let r = BigRational::new(BigInt::from(123456789), BigInt::from(1024));
        assert_eq!(parse_rational(&r.to_string()), Some(r));
        assert_eq!(parse_rational("17"), Some(BigRational::from_integer(17.into())));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }
}
