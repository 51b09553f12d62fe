// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use lorentz_lab::bracket::Bracket;
use lorentz_lab::fourier::ft_indicator_1d;
use lorentz_lab::lorentz::{lorentz_norm_step, LorentzIndex};
use lorentz_lab::measure::rearrange_pc;
use lorentz_lab::torus::{
    coefficient_sequence, convergence_study, discrepancy, fourier_coefficient, staircase_closed_form,
    staircase_norm, uniform_closeness, StepExtension, TorusResolution, TorusTestFunction,
};
use lorentz_lab::{Exec, LabError};

const P: f64 = 1.5;

/// `∫_{-π}^{π} g_a(t) e^{-imt} dt` by composite Simpson over the support.
fn coefficient_by_quadrature(a: u64, m: i64) -> f64 {
    let r = 1.0 / a as f64;
    let n = 200_000;
    let h = 2.0 * r / n as f64;
    let f = |t: f64| (m as f64 * t).cos();
    let mut s = f(-r) + f(r);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(-r + i as f64 * h);
    }
    (2.0 / a as f64).powf(-1.0 / P) * s * h / 3.0
}

fn cp_reference() -> Bracket {
    // Reference bracket from a uniform(400, 2^16) profile at p = 3/2.
    lorentz_lab::fourier::reference_profile(P, 400.0, 1 << 16).unwrap().cp
}

#[test]
fn mean_value_coefficient() {
    assert!((fourier_coefficient(2, P, 0) - 1.0).abs() < 1e-15);
    assert!((fourier_coefficient(1, P, 0) - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
}

#[test]
fn coefficients_match_quadrature() {
    for a in [1, 3, 16] {
        for m in [-7, -1, 0, 1, 2, 50, 301] {
            let got = fourier_coefficient(a, P, m);
            let want = coefficient_by_quadrature(a, m);
            assert!((got - want).abs() < 1e-10, "a = {a}, m = {m}: {got} vs {want}");
        }
    }
}

#[test]
fn coefficients_obey_the_envelope() {
    let g = TorusTestFunction::new(32, P).unwrap();
    let b = g.envelope_constant();
    for m in 1..5000i64 {
        assert!(g.coefficient(m).abs() <= b / m as f64 * (1.0 + 1e-14));
        assert_eq!(g.coefficient(m), g.coefficient(-m));
    }
}

#[test]
fn sequence_head_length_and_tail() {
    let s = coefficient_sequence(1, P, 3, Exec::default()).unwrap();
    assert_eq!(s.head().len(), 7);
    let b = 2.0 * 0.5f64.powf(1.0 / P);
    assert!((s.tail_constant() / (2.0 * b * 8.0 / 7.0) - 1.0).abs() < 1e-11);
    assert!(coefficient_sequence(0, P, 3, Exec::default()).is_err());
    assert!(coefficient_sequence(4, 2.0, 3, Exec::default()).is_err());
}

#[test]
fn staircase_identity_at_scale_eight() {
    let ext = StepExtension::new(TorusTestFunction::new(8, P).unwrap(), 512).unwrap();
    let direct = staircase_norm(&ext).unwrap();
    assert!((direct - staircase_closed_form(&ext).unwrap()).abs() < 1e-12 * direct);
    // 2^{1/p'} (Σ_k k^{p/p'-1} (c_k^*)^p)^{1/p} over the one-sided head.
    let mut c: Vec<f64> = (0..=512).map(|m| fourier_coefficient(8, P, m).abs()).collect();
    c.sort_by(|x, y| y.total_cmp(x));
    let sum: f64 = c
        .iter()
        .enumerate()
        .map(|(i, v)| ((i + 1) as f64).powf(P / 3.0 - 1.0) * v.powf(P))
        .sum();
    let oracle = 2f64.powf(1.0 / 3.0) * sum.powf(1.0 / P);
    assert!((direct - oracle).abs() < 1e-10 * oracle, "{direct} vs {oracle}");
}

#[test]
fn reverse_scaling_preserves_the_norm() {
    let ext = StepExtension::new(TorusTestFunction::new(16, P).unwrap(), 300).unwrap();
    let idx = LorentzIndex::dual_pair(P).unwrap();
    let before = lorentz_norm_step(&rearrange_pc(&ext.function), idx);
    let after = lorentz_norm_step(&rearrange_pc(&ext.reverse_scaled().unwrap()), idx);
    assert!((before - after).abs() < 1e-12 * before);
}

#[test]
fn reverse_scaled_steps_have_width_two_over_a() {
    let a = 16u64;
    let ext = StepExtension::new(TorusTestFunction::new(a, P).unwrap(), 200).unwrap();
    let r = rearrange_pc(&ext.reverse_scaled().unwrap());
    let cell = 2.0 / a as f64;
    for (t0, t1, _) in r.steps() {
        let k = (t1 - t0) / cell;
        assert!((k - k.round()).abs() < 1e-9 && k.round() >= 1.0);
    }
    for piece in ext.reverse_scaled().unwrap().pieces() {
        // Cells of width 1/a; the two cells around 0 share c_0 and merge.
        let k = piece.measure() * a as f64;
        assert!((k - k.round()).abs() < 1e-9 && (k.round() == 1.0 || k.round() == 2.0));
    }
}

#[test]
fn uniform_closeness_against_dense_sampling() {
    for a in [4u64, 64] {
        let b = uniform_closeness(a, P, 30.0, Exec::default()).unwrap();
        let amp = 2f64.powf(-1.0 / P);
        assert!((b.hi - 2.0 * amp * 0.43619 / a as f64).abs() < 1e-12);
        // Sample every cell at several interior points.
        let af = a as f64;
        let mut worst = 0.0f64;
        for m in 0..(30 * a) {
            let step = af.powf(1.0 - 1.0 / P) * fourier_coefficient(a, P, m as i64);
            for q in 1..8 {
                let x = (m as f64 + q as f64 / 8.0) / af;
                worst = worst.max((amp * ft_indicator_1d(1.0, x) - step).abs());
            }
        }
        assert!(worst <= b.hi, "a = {a}: {worst} > {}", b.hi);
        assert!(b.lo <= worst + 1e-12);
    }
}

#[test]
fn discrepancy_shrinks_with_the_scale() {
    let cp = cp_reference();
    let res = TorusResolution::default();
    let rows: Vec<_> = [16u64, 256, 4096]
        .iter()
        .map(|&a| discrepancy(a, P, cp, &res, Exec::default()).unwrap())
        .collect();
    assert!(rows[1].discrepancy.hi < rows[0].discrepancy.hi);
    assert!(rows[2].discrepancy.hi < rows[1].discrepancy.hi);
    for r in &rows {
        assert_eq!(r.cutoff, res.cutoff(r.a));
        assert!(r.discrepancy.lo >= 0.0);
    }
    assert_eq!(res.cutoff(16), 4096);
    assert_eq!(res.cutoff(4096), 64 * 4096);
}

#[test]
fn study_thresholds_pick_the_first_scale_below() {
    let cp = cp_reference();
    let gammas = [0.5, 0.1, 0.05, 1e-4];
    let s = convergence_study(P, &[16, 64, 256, 1024], &gammas, cp, &TorusResolution::default(), Exec::default())
        .unwrap();
    assert!(s.nonincreasing);
    for t in &s.thresholds {
        let want = s.rows.iter().find(|r| r.discrepancy.hi <= t.gamma).map(|r| r.a);
        assert_eq!(t.a0, want);
    }
    assert_eq!(s.thresholds[0].a0, Some(16));
    assert_eq!(s.thresholds[3].a0, None);
    let csv = s.to_csv();
    assert!(csv.starts_with("a,p,continuous_lo,continuous_hi,sequence_lo,sequence_hi,discrepancy_upper\n"));
    assert_eq!(csv.lines().count(), 5);
    assert!(matches!(
        convergence_study(P, &[64, 16], &gammas, cp, &TorusResolution::default(), Exec::default()),
        Err(LabError::Domain { .. })
    ));
}

#[test]
fn tight_width_requirement_is_unresolved() {
    let res = TorusResolution { max_width: Some(1e-9), ..TorusResolution::default() };
    assert!(matches!(
        discrepancy(16, P, cp_reference(), &res, Exec::default()),
        Err(LabError::Unresolved { .. })
    ));
}
