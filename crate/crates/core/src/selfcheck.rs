// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! A quick invariant suite over the measure, Lorentz and Fourier layers.
//!
//! Every check recomputes a quantity along a second route (closed form,
//! distribution function, dilated grid) and reports the worst deviation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Exec;
use crate::fourier::{build_profile, scaled_lorentz_identity_check, PartitionSpec, ProfileSpec};
use crate::lorentz::{lorentz_norm_step, lp_norm_pc, LorentzIndex};
use crate::measure::{distribution_pc, rearrange_pc, Interval, PiecewiseConstantFn};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Largest deviation seen, in the check's own units.
    pub worst: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfCheckReport {
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<CheckOutcome>,
}

impl SelfCheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn outcome(name: &str, worst: f64, tolerance: f64) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed: worst <= tolerance,
        worst,
        tolerance,
    }
}

/// Up to `n` pieces on `[-8, 8]` with values drawn from a small lattice so
/// that ties occur.
fn random_pc(rng: &mut ChaCha8Rng, n: usize) -> Result<PiecewiseConstantFn> {
    let mut cuts: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-8.0..8.0)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let pieces = cuts
        .chunks_exact(2)
        .map(|c| {
            let v = rng.gen_range(-6i32..=6) as f64 / 2.0;
            Interval::new(c[0], c[1]).map(|iv| (iv, v))
        })
        .collect::<Result<Vec<_>>>()?;
    PiecewiseConstantFn::new(pieces)
}

/// Runs the suite on `samples` random functions drawn from `seed`.
pub fn run_self_check(seed: u64, samples: usize, exec: Exec) -> Result<SelfCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut equi, mut cake, mut additive) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let n = rng.gen_range(1..12);
        let f = random_pc(&mut rng, n)?;
        let r = rearrange_pc(&f);
        // Equimeasurability at every level the function takes.
        for piece in f.pieces() {
            let tau = piece.value.abs() * 0.999 + 1e-9;
            let d = distribution_pc(&f, tau)?;
            equi = equi.max((d - r.distribution(tau)).abs());
        }
        // Layer cake: ‖f‖_p^p = ‖f^*‖_p^p.
        let p = rng.gen_range(1.0..4.0);
        let direct = lp_norm_pc(&f, p)?;
        let via = lorentz_norm_step(&r, LorentzIndex::lebesgue(p)?);
        cake = cake.max((direct - via).abs() / direct.max(1e-300));
        // Disjoint sums: the distribution adds up.
        let shift = 20.0;
        let g = random_pc(&mut rng, n)?;
        let g_shifted = PiecewiseConstantFn::new(
            g.pieces()
                .iter()
                .map(|q| (Interval { lo: q.cell[0].lo + shift, hi: q.cell[0].hi + shift }, q.value))
                .collect(),
        )?;
        let sum = f.add(&g_shifted)?;
        let tau = rng.gen_range(0.1..3.0);
        let lhs = distribution_pc(&sum, tau)?;
        let rhs = distribution_pc(&f, tau)? + distribution_pc(&g, tau)?;
        additive = additive.max((lhs - rhs).abs());
    }

    let mut checks = vec![
        outcome("equimeasurability", equi, 1e-12),
        outcome("layer_cake", cake, 1e-12),
        outcome("disjoint_additivity", additive, 1e-12),
    ];

    let mut unit = 0.0f64;
    for &a in &[1.0, 2.0, 10.0, 100.0] {
        for &p in &[1.25, 1.5, 1.75] {
            let g = PiecewiseConstantFn::indicator(
                Interval::new(-1.0 / a, 1.0 / a)?,
                (2.0f64 / a).powf(-1.0 / p),
            )?;
            unit = unit.max((lp_norm_pc(&g, p)? - 1.0).abs());
        }
    }
    checks.push(outcome("unit_test_functions", unit, 1e-12));

    // Dilation: ‖f(c·)‖_{r,s} = c^{-1/r} ‖f‖_{r,s}.
    let f = random_pc(&mut rng, 6)?;
    let idx = LorentzIndex::dual_pair(1.5)?;
    let base = lorentz_norm_step(&rearrange_pc(&f), idx);
    let mut dil = 0.0f64;
    for &c in &[0.25, 3.0, 1024.0] {
        let v = lorentz_norm_step(&rearrange_pc(&f.dilate(c)?), idx);
        dil = dil.max((v * c.powf(1.0 / idx.r) - base).abs() / base.max(1e-300));
    }
    checks.push(outcome("dilation", dil, 1e-12));

    // Scale invariance of c_p on a coarse grid: the brackets must overlap.
    let profile = build_profile(
        &ProfileSpec {
            p: 1.5,
            partition: PartitionSpec::uniform(200.0, 1 << 14),
            tolerance: None,
            allow_boundary: false,
        },
        exec,
    )?;
    let mut gap = 0.0f64;
    for &a in &[0.25, 32.0] {
        let b = scaled_lorentz_identity_check(1.5, a, &profile, exec)?;
        gap = gap.max(profile.cp.abs_diff(&b).lo);
    }
    checks.push(outcome("scale_invariance", gap, 0.0));

    Ok(SelfCheckReport {
        seed,
        samples,
        checks,
    })
}
