// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every criterion carries its own runtime budget.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lorentz_lab::fourier::{
    build_profile, indicator_transform_norm, reference_profile, scaled_lorentz_identity_check,
    Layer, PartitionSpec, ProfileSpec, ReferenceProfile,
};
use lorentz_lab::lorentz::lp_norm_pc;
use lorentz_lab::measure::{distribution_pc, rearrange_pc, Interval, PiecewiseConstantFn, StepRearrangement};
use lorentz_lab::probe::{
    chain_lower_bound, decay_exponent, direct_lorentz_norm, min_ratio, upper_estimate,
    CoefficientVector, ProbeContext, Target,
};
use lorentz_lab::torus::{convergence_study, discrepancy_with_factor, TorusResolution};
use lorentz_lab::witness::{build_family, build_family_with_profile, verify_family, WitnessFamily, WitnessPolicy};
use lorentz_lab::{Bracket, Exec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const P: f64 = 1.5;
const EPS: f64 = 0.25;

struct Outcome {
    ok: bool,
    detail: String,
}

fn run(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = f();
    let el = t.elapsed();
    let in_time = el <= budget;
    let pass = out.ok && in_time;
    println!(
        "{} [{id}] {name}: {} ({:.2}s of {}s{})",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        el.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { ", over budget" }
    );
    pass
}

fn sphere_point(rng: &mut ChaCha8Rng, k: usize, p: f64) -> CoefficientVector {
    loop {
        let x: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = x.iter().map(|v: &f64| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        if n > 1e-3 {
            return CoefficientVector::new(x.iter().map(|v| v / n).collect(), p).unwrap();
        }
    }
}

fn unit_norms() -> Outcome {
    let mut worst = 0.0f64;
    for a in [1.0, 2.0, 10.0, 100.0] {
        for p in [1.25, 1.5, 1.75] {
            let g = PiecewiseConstantFn::indicator(
                Interval::new(-1.0 / a, 1.0 / a).unwrap(),
                (2.0f64 / a).powf(-1.0 / p),
            )
            .unwrap();
            worst = worst.max((lp_norm_pc(&g, p).unwrap() - 1.0).abs());
        }
    }
    Outcome {
        ok: worst <= 1e-12,
        detail: format!("max |‖g_a‖_p - 1| = {worst:.2e}"),
    }
}

fn scale_invariance(profile: &ReferenceProfile) -> Outcome {
    let bs: Vec<Bracket> = [0.25, 1.0, 32.0]
        .iter()
        .map(|&a| scaled_lorentz_identity_check(P, a, profile, Exec::default()).unwrap())
        .collect();
    let widths_ok = bs.iter().all(|b| b.width() < 1e-2);
    let meet = bs
        .iter()
        .all(|x| bs.iter().all(|y| x.intersects(y)));
    Outcome {
        ok: widths_ok && meet,
        detail: format!(
            "a=1/4 {}, a=1 {}, a=32 {}; max width {:.2e}",
            bs[0],
            bs[1],
            bs[2],
            bs.iter().map(Bracket::width).fold(0.0, f64::max)
        ),
    }
}

fn parseval() -> Outcome {
    let partition = PartitionSpec::Layered {
        layers: vec![
            Layer { end: 16.0, step: 1.0 / 4096.0 },
            Layer { end: 256.0, step: 1.0 / 512.0 },
            Layer { end: 4096.0, step: 1.0 / 64.0 },
            Layer { end: 32768.0, step: 1.0 / 8.0 },
        ],
    };
    let f1 = indicator_transform_norm(2.0, 1.0, &partition, true, Exec::default()).unwrap();
    let c2 = build_profile(
        &ProfileSpec {
            p: 2.0,
            partition,
            tolerance: None,
            allow_boundary: true,
        },
        Exec::default(),
    )
    .unwrap()
    .cp;
    let within = |b: &Bracket, v: f64| (b.lo - v).abs() <= 1e-3 && (b.hi - v).abs() <= 1e-3;
    let (e1, e2) = (2.0 * PI.sqrt(), (2.0 * PI).sqrt());
    Outcome {
        ok: within(&f1, e1) && within(&c2, e2),
        detail: format!("‖F f_1‖_2 in {f1} (2√π = {e1:.9}), c_2 in {c2} (√(2π) = {e2:.9})"),
    }
}

/// Sort-based rearrangement of a function with dyadic breakpoints, so that
/// every partial sum of measures is exact.
fn brute_rearrangement(f: &PiecewiseConstantFn) -> (Vec<f64>, Vec<f64>) {
    let mut layers: Vec<(f64, f64)> = f
        .pieces()
        .iter()
        .map(|q| (q.value.abs(), q.cell[0].hi - q.cell[0].lo))
        .filter(|&(v, w)| v > 0.0 && w > 0.0)
        .collect();
    layers.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let (mut breaks, mut values) = (Vec::new(), Vec::<f64>::new());
    let mut t = 0.0;
    for (v, w) in layers {
        t += w;
        if values.last() == Some(&v) {
            *breaks.last_mut().unwrap() = t;
        } else {
            breaks.push(t);
            values.push(v);
        }
    }
    (breaks, values)
}

fn dyadic_pc(rng: &mut ChaCha8Rng, offset: f64) -> PiecewiseConstantFn {
    let n = rng.gen_range(1..16);
    let mut cuts: Vec<i64> = (0..2 * n).map(|_| rng.gen_range(-4096..4096)).collect();
    cuts.sort_unstable();
    cuts.dedup();
    let pieces = cuts
        .chunks_exact(2)
        .map(|c| {
            let iv = Interval::new(offset + c[0] as f64 / 512.0, offset + c[1] as f64 / 512.0).unwrap();
            (iv, rng.gen_range(-8i32..=8) as f64 / 4.0)
        })
        .collect();
    PiecewiseConstantFn::new(pieces).unwrap()
}

fn rearrangement_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut mismatches, mut additivity, mut lower_bound) = (0, 0, 0);
    for _ in 0..1000 {
        let f = dyadic_pc(&mut rng, 0.0);
        let r = rearrange_pc(&f);
        let (b, v) = brute_rearrangement(&f);
        if r.breaks() != b.as_slice() || r.values() != v.as_slice() {
            mismatches += 1;
        }
        // f on [-8, 8], g on [24, 40]: disjoint supports.
        let g = dyadic_pc(&mut rng, 32.0);
        let h = f.add(&g).unwrap();
        let (rf, rg, rh) = (r, rearrange_pc(&g), rearrange_pc(&h));
        let mut levels: Vec<f64> = rf.values().iter().chain(rg.values()).copied().collect();
        levels.push(0.1);
        for &tau in &levels {
            let lhs = distribution_pc(&h, tau).unwrap();
            let rhs = distribution_pc(&f, tau).unwrap() + distribution_pc(&g, tau).unwrap();
            if lhs != rhs {
                additivity += 1;
            }
        }
        // Two disjoint windows I_f = (0, s), I_g = [s, ∞) with a random split.
        let s = rng.gen_range(0.0..16.0);
        let check = |t: f64, rs: &StepRearrangement| rh.eval(t) >= rs.eval(t);
        let breaks: Vec<f64> = rf.breaks().iter().chain(rg.breaks()).chain(rh.breaks()).copied().collect();
        for &t in &breaks {
            for tt in [t, t * (1.0 - 1e-9)] {
                let ok = if tt < s { check(tt, &rf) } else { check(tt, &rg) };
                if !ok {
                    lower_bound += 1;
                }
            }
        }
    }
    Outcome {
        ok: mismatches == 0 && additivity == 0 && lower_bound == 0,
        detail: format!(
            "1000 functions: {mismatches} rearrangement mismatches, {additivity} additivity failures, {lower_bound} lower-bound failures"
        ),
    }
}

fn witness_certification(family: &WitnessFamily, build_time: Duration) -> Outcome {
    let margins_ok = family.levels.iter().all(|l| l.certificate.is_certified());
    let disjoint = family.disjointness().is_ok();
    let v = verify_family(family, &family.policy.refined(), Exec::default()).unwrap();
    let min = |f: fn(&lorentz_lab::witness::LevelCertificate) -> f64| {
        family.levels.iter().map(|l| f(&l.certificate)).fold(f64::INFINITY, f64::min)
    };
    Outcome {
        ok: margins_ok && disjoint && v.passed(),
        detail: format!(
            "J = {}, c_p in {}, min margins mass {:.2e} off {:.2e} window {:.2e}, disjoint {disjoint}, refined re-check {} (c_p in {}); build {:.2}s",
            family.len(),
            family.cp,
            min(|c| c.mass_margin),
            min(|c| c.off_margin),
            min(|c| c.window_margin),
            if v.passed() { "passed" } else { "failed" },
            v.profile.cp,
            build_time.as_secs_f64()
        ),
    }
}

fn isomorphism_witness(family: &WitnessFamily) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let floor = family.cp.lo * (1.0 - 1.5 * EPS);
    let bound = floor / (1.0 + EPS);
    let (mut fails, mut worst) = (0, f64::INFINITY);
    for _ in 0..200 {
        let c = sphere_point(&mut rng, family.len(), P);
        let up = upper_estimate(family, &c).unwrap();
        let lo = chain_lower_bound(family, &c).unwrap().lo;
        if up > c.a_norm * (1.0 + EPS) || lo < c.a_norm * floor || lo / up < bound {
            fails += 1;
        }
        worst = worst.min(lo / up);
    }
    Outcome {
        ok: fails == 0,
        detail: format!("200 vectors, {fails} failures; min ratio {worst:.6} >= {bound:.6}"),
    }
}

fn target_contrast(ctx: &ProbeContext) -> Outcome {
    let ks = [1usize, 2, 4, 8, 16];
    let mut slopes = Vec::new();
    let mut rows = Vec::new();
    for target in [Target::Lorentz, Target::Lebesgue] {
        let reports: Vec<_> = ks
            .iter()
            .map(|&k| min_ratio(ctx, k, target, 4000, 11).unwrap())
            .collect();
        rows.push(
            reports
                .iter()
                .map(|r| format!("{:.4}", r.min_ratio))
                .collect::<Vec<_>>()
                .join(" "),
        );
        slopes.push(decay_exponent(&reports).unwrap());
    }
    let expected = 1.0 / lorentz_lab::conjugate(P) - 1.0 / P;
    Outcome {
        ok: slopes[0].abs() <= 0.05 && (slopes[1] - expected).abs() <= 0.1,
        detail: format!(
            "Lorentz slope {:+.4} [{}], Lebesgue slope {:+.4} (model {expected:+.4}) [{}]",
            slopes[0], rows[0], slopes[1], rows[1]
        ),
    }
}

fn discrete_lemma(cp: Bracket) -> Outcome {
    let scales = [16u64, 64, 256, 1024];
    let study =
        convergence_study(P, &scales, &[0.05 * cp.hi], cp, &TorusResolution::default(), Exec::default())
            .unwrap();
    let first = study.rows[0].discrepancy.hi;
    let last = study.rows.last().unwrap().discrepancy.hi;
    let ups: Vec<String> = study.rows.iter().map(|r| format!("{:.4}", r.discrepancy.hi)).collect();
    Outcome {
        ok: first / last >= 3.0 && last < 0.05 * cp.hi,
        detail: format!(
            "upper ends [{}], reduction x{:.2}, final {last:.4} < {:.4}",
            ups.join(" "),
            first / last,
            0.05 * cp.hi
        ),
    }
}

fn cross_estimators(grid: &lorentz_lab::probe::DirectGrid) -> Outcome {
    let family = build_family(P, EPS, 2, &WitnessPolicy::default(), Exec::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let (mut fails, mut min_gap) = (0, f64::INFINITY);
    for _ in 0..50 {
        let c = sphere_point(&mut rng, 2, P);
        let direct = direct_lorentz_norm(&family, &c, grid, Exec::default()).unwrap();
        let chain = chain_lower_bound(&family, &c).unwrap();
        if direct.hi < chain.lo {
            fails += 1;
        }
        min_gap = min_gap.min(direct.hi - chain.lo);
    }
    Outcome {
        ok: fails == 0,
        detail: format!("50 vectors, {fails} violations; min (direct upper - chain lower) = {min_gap:.4}"),
    }
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut all = true;
    all &= run(1, "unit norms of g_a", secs(1), unit_norms);

    let mut profile = None;
    all &= run(2, "scale invariance of c_p", secs(60), || {
        let prof = reference_profile(P, 400.0, 1 << 16).unwrap();
        let out = scale_invariance(&prof);
        profile = Some(prof);
        out
    });
    let profile = profile.unwrap();

    all &= run(3, "Parseval anchor at p = 2", secs(60), parseval);
    all &= run(4, "rearrangement oracle and disjointness lemmas", secs(10), rearrangement_oracle);

    let mut built = None;
    all &= run(5, "witness certification", secs(300), || {
        let t = Instant::now();
        let (family, wprof) =
            build_family_with_profile(P, EPS, 4, &WitnessPolicy::default(), Exec::default()).unwrap();
        let out = witness_certification(&family, t.elapsed());
        built = Some((family, wprof));
        out
    });
    let (family, wprof) = built.unwrap();

    all &= run(6, "isomorphism witness", secs(120), || isomorphism_witness(&family));

    let ctx = ProbeContext::new(&family, &wprof, Exec::default()).unwrap();
    all &= run(7, "target contrast", secs(300), || target_contrast(&ctx));
    all &= run(8, "discrete lemma", secs(300), || discrete_lemma(profile.cp));
    all &= run(9, "cross-estimator consistency", secs(300), || cross_estimators(&ctx.grid));

    for a in [16u64, 1024] {
        let r = discrepancy_with_factor(a, P, profile.cp, &TorusResolution::default(), 2.0, Exec::default())
            .unwrap();
        println!(
            "INFO discrepancy with the sequence norm doubled, a = {a}: {}",
            r.discrepancy
        );
    }

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
