// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use lorentz_lab::fourier::{indicator_transform_norm, PartitionSpec};
use lorentz_lab::lorentz::{
    lorentz_norm_enclosure, lorentz_norm_step, lp_norm_pc, sequence_lorentz_norm, LorentzIndex,
    MagnitudeSequence,
};
use lorentz_lab::measure::{
    rearrange_pc, Interval, PiecewiseConstantFn, RearrangementEnclosure, StepRearrangement,
};
use lorentz_lab::torus::coefficient_sequence;
use lorentz_lab::{Exec, LabError};

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

#[test]
fn indicator_norm_closed_form() {
    let r = StepRearrangement::new(vec![4.0], vec![1.0]).unwrap();
    let idx = LorentzIndex::new(3.0, 1.5).unwrap();
    // (∫_0^4 t^{s/r - 1} dt)^{1/s} = ((r/s) 4^{s/r})^{1/s} = 2^{2/3} 4^{1/3}.
    let expected = 2f64.powf(4.0 / 3.0);
    assert!((lorentz_norm_step(&r, idx) - expected).abs() < 1e-14);
}

#[test]
fn weak_type_is_the_supremum() {
    let r = StepRearrangement::new(vec![1.0, 8.0], vec![3.0, 1.0]).unwrap();
    let idx = LorentzIndex::new(3.0, f64::INFINITY).unwrap();
    // max(1^{1/3} 3, 8^{1/3} 1) = 3.
    assert_eq!(lorentz_norm_step(&r, idx), 3.0);
}

#[test]
fn zero_rearrangement_has_zero_norm() {
    let r = StepRearrangement::default();
    assert_eq!(lorentz_norm_step(&r, LorentzIndex::dual_pair(1.5).unwrap()), 0.0);
}

#[test]
fn indices_are_validated() {
    assert!(LorentzIndex::new(0.0, 1.0).is_err());
    assert!(LorentzIndex::new(2.0, -1.0).is_err());
    assert!(LorentzIndex::dual_pair(1.0).is_err());
}

#[test]
fn lebesgue_norms_of_test_functions() {
    let f2 = PiecewiseConstantFn::indicator(iv(-0.5, 0.5), 1.0).unwrap();
    assert!((lp_norm_pc(&f2, 1.5).unwrap() - 1.0).abs() < 1e-15);
    for a in [0.3, 1.0, 7.0, 1e6] {
        for p in [1.1, 1.5, 1.9] {
            let g = PiecewiseConstantFn::indicator(iv(-1.0 / a, 1.0 / a), (2.0f64 / a).powf(-1.0 / p)).unwrap();
            assert!((lp_norm_pc(&g, p).unwrap() - 1.0).abs() < 1e-12);
        }
    }
    assert_eq!(lp_norm_pc(&PiecewiseConstantFn::zero(1), 2.0).unwrap(), 0.0);
    assert!(matches!(lp_norm_pc(&f2, 0.5), Err(LabError::Domain { .. })));
    assert_eq!(lp_norm_pc(&two_step(), f64::INFINITY).unwrap(), 2.0);
}

fn two_step() -> PiecewiseConstantFn {
    PiecewiseConstantFn::new(vec![(iv(0.0, 3.0), 1.0), (iv(5.0, 6.0), -2.0)]).unwrap()
}

#[test]
fn degenerate_enclosure_collapses() {
    let r = rearrange_pc(&two_step());
    let idx = LorentzIndex::dual_pair(1.5).unwrap();
    let b = lorentz_norm_enclosure(&RearrangementEnclosure::exact(r.clone()), idx, None).unwrap();
    let v = lorentz_norm_step(&r, idx);
    assert!(b.contains(v));
    assert!(b.width() <= 1e-11 * v);
}

#[test]
fn window_past_support_is_zero() {
    let r = RearrangementEnclosure::exact(rearrange_pc(&two_step()));
    let idx = LorentzIndex::dual_pair(1.5).unwrap();
    let b = lorentz_norm_enclosure(&r, idx, Some((10.0, 20.0))).unwrap();
    assert_eq!((b.lo, b.hi), (0.0, 0.0));
}

#[test]
fn weak_type_window_is_unsupported() {
    let r = RearrangementEnclosure::exact(rearrange_pc(&two_step()));
    let idx = LorentzIndex::new(2.0, f64::INFINITY).unwrap();
    assert!(matches!(
        lorentz_norm_enclosure(&r, idx, Some((0.5, 1.0))),
        Err(LabError::Unsupported(_))
    ));
    assert!(matches!(
        lorentz_norm_enclosure(&r, idx, Some((2.0, 1.0))),
        Err(LabError::Unsupported(_) | LabError::Domain { .. })
    ));
}

#[test]
fn windows_split_additively_in_power() {
    let r = RearrangementEnclosure::exact(rearrange_pc(&two_step()));
    let idx = LorentzIndex::dual_pair(1.5).unwrap();
    let whole = lorentz_norm_enclosure(&r, idx, Some((0.25, 3.0))).unwrap().mid().powf(1.5);
    let a = lorentz_norm_enclosure(&r, idx, Some((0.25, 1.3))).unwrap().mid().powf(1.5);
    let b = lorentz_norm_enclosure(&r, idx, Some((1.3, 3.0))).unwrap().mid().powf(1.5);
    assert!((whole - a - b).abs() < 1e-12);
}

/// `‖F f_1‖_{p',p}` by sampling `|2 sin x / x|` at cell midpoints on
/// `[0, X]`, sorting the samples (each standing for measure `2h`) and
/// integrating `t^{p/p'-1}` exactly over each slot.
fn sampled_norm(p: f64, x_max: f64, h: f64) -> f64 {
    let n = (x_max / h) as usize;
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let x = (i as f64 + 0.5) * h;
            (2.0 * x.sin() / x).abs()
        })
        .collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let alpha = p * (1.0 - 1.0 / p);
    let mut sum = 0.0;
    for (k, val) in v.iter().enumerate() {
        let (t0, t1) = (2.0 * h * k as f64, 2.0 * h * (k + 1) as f64);
        sum += val.powf(p) * (t1.powf(alpha) - t0.powf(alpha)) / alpha;
    }
    sum.powf(1.0 / p)
}

#[test]
fn transform_norm_contains_quadrature_oracle() {
    let p = 1.5;
    let b = indicator_transform_norm(p, 1.0, &PartitionSpec::uniform(400.0, 1 << 16), false, Exec::default())
        .unwrap();
    let coarse = sampled_norm(p, 4000.0, 1.0 / 100.0);
    let fine = sampled_norm(p, 8000.0, 1.0 / 200.0);
    // The sampled values converge from below as the cutoff grows.
    assert!((fine - coarse).abs() < 2e-3, "{coarse} vs {fine}");
    assert!(b.lo - 1e-3 <= fine && fine <= b.hi + 1e-3, "{fine} not in {b}");
}

#[test]
fn sequence_single_entry() {
    let c = MagnitudeSequence::new(vec![0.0, 2.5, 0.0], 0.0).unwrap();
    let b = sequence_lorentz_norm(&c, LorentzIndex::dual_pair(1.5).unwrap()).unwrap();
    assert!(b.contains(2.5) && b.width() < 1e-10);
}

#[test]
fn sequence_of_ones_matches_direct_sum() {
    let p = 1.5;
    let k = 1000;
    let c = MagnitudeSequence::new(vec![1.0; k], 0.0).unwrap();
    let b = sequence_lorentz_norm(&c, LorentzIndex::dual_pair(p).unwrap()).unwrap();
    let w = p / (p / (p - 1.0)) - 1.0;
    let mut direct = 0.0;
    for i in (1..=k).rev() {
        direct += (i as f64).powf(w);
    }
    let direct = direct.powf(1.0 / p);
    assert!(b.contains(direct), "{direct} not in {b}");
}

#[test]
fn sequence_rejects_bad_input() {
    assert!(MagnitudeSequence::new(vec![-1.0], 0.0).is_err());
    assert!(MagnitudeSequence::new(vec![1.0], f64::NAN).is_err());
    let c = MagnitudeSequence::new(vec![1.0], 0.0).unwrap();
    assert!(sequence_lorentz_norm(&c, LorentzIndex::new(2.0, f64::INFINITY).unwrap()).is_err());
}

#[test]
fn torus_sequence_bracket_contains_longer_head() {
    let p = 1.5;
    let idx = LorentzIndex::dual_pair(p).unwrap();
    let short = sequence_lorentz_norm(&coefficient_sequence(64, p, 4096, Exec::default()).unwrap(), idx).unwrap();
    let long = sequence_lorentz_norm(&coefficient_sequence(64, p, 40960, Exec::default()).unwrap(), idx).unwrap();
    assert!(short.lo <= long.lo && long.lo <= short.hi, "{long} vs {short}");
    assert!(long.width() < short.width());
}

#[test]
fn doubling_the_head_shrinks_the_bracket() {
    let idx = LorentzIndex::dual_pair(1.5).unwrap();
    let a = sequence_lorentz_norm(&coefficient_sequence(16, 1.5, 512, Exec::default()).unwrap(), idx).unwrap();
    let b = sequence_lorentz_norm(&coefficient_sequence(16, 1.5, 1024, Exec::default()).unwrap(), idx).unwrap();
    assert!(b.width() < a.width());
    assert!(a.intersects(&b));
}
