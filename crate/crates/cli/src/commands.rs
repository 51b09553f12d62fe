// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use anyhow::Result;
use serde::Serialize;

use lorentz_lab::fourier::{build_profile, PartitionSpec, ProfileSpec, ProfileSummary};
use lorentz_lab::probe::{
    decay_exponent, isomorphism_floor, min_ratio, ratio_table_csv, sample_ratios, ProbeContext,
    RatioReport, Target,
};
use lorentz_lab::selfcheck::{run_self_check, SelfCheckReport};
use lorentz_lab::torus::{convergence_study, ConvergenceStudy, TorusResolution};
use lorentz_lab::witness::{build_family, verify_family, FamilyVerification, WitnessCertificate};
use lorentz_lab::{Bracket, Exec, LabError};

use crate::config::{ConfigError, CpConfig, DiscreteConfig, NormsConfig, ProbeConfig, WitnessBuildConfig, WitnessVerifyConfig};
use crate::output::{gnuplot_script, OutDir};

/// How a command ended when it ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Passed,
    /// A certified inequality failed.
    Failed,
}

/// Writes an incomplete artifact for `err` when it is a library error, then
/// hands the error back.
fn flag_incomplete<C: Serialize, R: Serialize>(
    out: &OutDir,
    name: &str,
    command: &str,
    config: &C,
    sha: Option<&str>,
    partial: Option<R>,
    err: LabError,
) -> anyhow::Error {
    if let Err(e) = out.write_json(name, command, config, sha, partial, Some(err.to_string())) {
        return e.context(err.to_string());
    }
    err.into()
}

pub fn norms_check(out: &OutDir, cfg: &NormsConfig, exec: Exec) -> Result<Status> {
    let report: SelfCheckReport = run_self_check(cfg.seed, cfg.samples, exec)
        .map_err(|e| flag_incomplete::<_, ()>(out, "norms_check.json", "norms check", cfg, None, None, e))?;
    for c in &report.checks {
        println!(
            "{:<22} {}  worst {:.3e} (tol {:.1e})",
            c.name,
            if c.passed { "ok  " } else { "FAIL" },
            c.worst,
            c.tolerance
        );
    }
    let passed = report.passed();
    out.write_json("norms_check.json", "norms check", cfg, None, Some(&report), None)?;
    Ok(if passed { Status::Passed } else { Status::Failed })
}

#[derive(Serialize)]
struct CpResult {
    cp: Bracket,
    width: f64,
    profile: ProfileSummary,
}

pub fn cp(out: &OutDir, cfg: &CpConfig, exec: Exec) -> Result<Status> {
    let spec = ProfileSpec {
        p: cfg.p,
        partition: PartitionSpec::uniform(cfg.cutoff, cfg.cells),
        tolerance: cfg.tolerance,
        allow_boundary: cfg.allow_boundary,
    };
    let profile = build_profile(&spec, exec)
        .map_err(|e| flag_incomplete::<_, ()>(out, "cp.json", "cp", cfg, None, None, e))?;
    println!("c_p in {} (width {:.3e})", profile.cp, profile.cp.width());
    let result = CpResult {
        cp: profile.cp,
        width: profile.cp.width(),
        profile: profile.summary(),
    };
    out.write_json("cp.json", "cp", cfg, None, Some(result), None)?;
    Ok(Status::Passed)
}

pub fn witness_build(out: &OutDir, cfg: &WitnessBuildConfig, exec: Exec) -> Result<Status> {
    let policy = lorentz_lab::witness::WitnessPolicy::default();
    let family = build_family(cfg.p, cfg.eps, cfg.levels, &policy, exec)
        .map_err(|e| flag_incomplete::<_, ()>(out, "witness.json", "witness build", cfg, None, None, e))?;
    let cert = family.certificate();
    let sha = cert.sha256();
    for l in &family.levels {
        println!(
            "level {}: a = {}, gamma = {:.4e}, window [{:.4e}, {:.4e}), margins {:.2e} {:.2e} {:.2e}",
            l.j,
            l.a,
            l.gamma,
            l.nu_l,
            l.nu_r,
            l.certificate.mass_margin,
            l.certificate.off_margin,
            l.certificate.window_margin
        );
    }
    let path = out.write_json("witness.json", "witness build", cfg, Some(&sha), Some(&cert), None)?;
    println!("certificate {} (sha256 {sha})", path.display());
    Ok(Status::Passed)
}

/// Reads a certificate, either bare or inside a `witness build` artifact.
pub fn load_certificate(path: &Path) -> Result<WitnessCertificate> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read certificate {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| LabError::Validation(format!("{}: {e}", path.display())))?;
    let inner = match value.get("result") {
        Some(serde_json::Value::Null) => {
            return Err(LabError::Validation(format!("{} holds no certificate (incomplete build)", path.display())).into())
        }
        Some(r) => r.clone(),
        None => value,
    };
    Ok(WitnessCertificate::from_json(&inner.to_string())?)
}

#[derive(Serialize)]
struct VerifyResult<'a> {
    verification: &'a FamilyVerification,
    samples: usize,
    floor: f64,
    min_ratio: f64,
    max_upper: f64,
    failures: usize,
}

pub fn witness_verify(out: &OutDir, cfg: &WitnessVerifyConfig, exec: Exec) -> Result<Status> {
    let cert = load_certificate(Path::new(&cfg.certificate))?;
    let sha = cert.sha256();
    let family = &cert.family;
    let fail = |e| flag_incomplete::<_, ()>(out, "verify.json", "witness verify", cfg, Some(&sha), None, e);
    let verification = verify_family(family, &family.policy, exec).map_err(fail)?;
    let rows = sample_ratios(family, cfg.samples, cfg.seed).map_err(fail)?;
    let floor = isomorphism_floor(family);
    let ceiling = 1.0 + family.epsilon;
    let failures = rows.iter().filter(|r| r.ratio < floor || r.upper > ceiling).count();
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max_upper = rows.iter().map(|r| r.upper).fold(0.0, f64::max);

    let mut csv = String::from("index,ratio,upper,lower");
    for j in 1..=family.len() {
        csv.push_str(&format!(",alpha_{j}"));
    }
    csv.push('\n');
    for r in &rows {
        csv.push_str(&format!("{},{:.12e},{:.12e},{:.12e}", r.index, r.ratio, r.upper, r.lower));
        for a in &r.alpha {
            csv.push_str(&format!(",{a:.12e}"));
        }
        csv.push('\n');
    }
    out.write_csv("verify_samples.csv", "witness verify", cfg, Some(&sha), true, &csv)?;
    let result = VerifyResult {
        verification: &verification,
        samples: rows.len(),
        floor,
        min_ratio,
        max_upper,
        failures,
    };
    out.write_json("verify.json", "witness verify", cfg, Some(&sha), Some(result), None)?;
    println!(
        "certificate re-check {}; {} samples, min ratio {min_ratio:.6} (floor {floor:.6}), {failures} failures",
        if verification.passed() { "passed" } else { "FAILED" },
        rows.len()
    );
    Ok(if verification.passed() && failures == 0 {
        Status::Passed
    } else {
        Status::Failed
    })
}

#[derive(Serialize)]
struct RatiosResult<'a> {
    reports: &'a [RatioReport],
    decay_exponent: Option<f64>,
    inconsistent: Vec<usize>,
}

pub fn probe_ratios(out: &OutDir, cfg: &ProbeConfig, exec: Exec) -> Result<Status> {
    let cert = load_certificate(Path::new(&cfg.certificate))?;
    let sha = cert.sha256();
    let family = &cert.family;
    let target: Target = cfg.target.parse()?;
    let profile = build_profile(&family.policy.profile_spec(family.p), exec)?;
    if profile.cp != family.cp {
        return Err(LabError::Validation(format!(
            "rebuilt c_p {} differs from the certificate's {}",
            profile.cp, family.cp
        ))
        .into());
    }
    let ctx = ProbeContext::new(family, &profile, exec)?;
    let mut reports = Vec::new();
    for k in cfg.ladder() {
        match min_ratio(&ctx, k, target, cfg.budget, cfg.seed) {
            Ok(r) => {
                println!("k = {k:>4} {:?}: min ratio {:.6} in {}", r.mode, r.min_ratio, r.ratio_bracket);
                reports.push(r);
            }
            Err(e) => {
                let partial = RatiosResult {
                    reports: &reports,
                    decay_exponent: None,
                    inconsistent: vec![],
                };
                return Err(flag_incomplete(out, "ratios.json", "probe ratios", cfg, Some(&sha), Some(partial), e));
            }
        }
    }
    // A certified lower bound above the direct upper end means a bug.
    let inconsistent: Vec<usize> = reports
        .iter()
        .filter(|r| r.certified_lower.is_some_and(|lo| lo > r.ratio_bracket.hi))
        .map(|r| r.k)
        .collect();
    let slope = decay_exponent(&reports).ok();
    if let Some(s) = slope {
        println!("decay exponent {s:+.4}");
    }
    out.write_csv("ratios.csv", "probe ratios", cfg, Some(&sha), true, &ratio_table_csv(&reports))?;
    out.write(
        "ratios.gp",
        &gnuplot_script("ratios.csv", &format!("min ratio, {target} target"), "k", "min ratio", &[(1, 4, &cfg.target)], true),
    )?;
    let result = RatiosResult {
        reports: &reports,
        decay_exponent: slope,
        inconsistent: inconsistent.clone(),
    };
    out.write_json("ratios.json", "probe ratios", cfg, Some(&sha), Some(result), None)?;
    Ok(if inconsistent.is_empty() { Status::Passed } else { Status::Failed })
}

pub fn discrete_study(out: &OutDir, cfg: &DiscreteConfig, exec: Exec) -> Result<Status> {
    let fail = |e| flag_incomplete::<_, ()>(out, "study.json", "discrete study", cfg, None, None, e);
    let spec = ProfileSpec {
        p: cfg.p,
        partition: PartitionSpec::uniform(cfg.cutoff, cfg.cells),
        tolerance: None,
        allow_boundary: false,
    };
    let profile = build_profile(&spec, exec).map_err(fail)?;
    let res = TorusResolution {
        per_scale: cfg.per_scale,
        min_cutoff: cfg.min_cutoff,
        max_width: None,
    };
    let study: ConvergenceStudy =
        convergence_study(cfg.p, &cfg.scales, &cfg.gammas, profile.cp, &res, exec).map_err(fail)?;
    for r in &study.rows {
        println!("a = {:>6}: discrepancy in {}", r.a, r.discrepancy);
    }
    for t in &study.thresholds {
        match t.a0 {
            Some(a) => println!("gamma = {}: first certified scale {a}", t.gamma),
            None => println!("gamma = {}: not reached on this ladder", t.gamma),
        }
    }
    out.write_csv("study.csv", "discrete study", cfg, None, true, &study.to_csv())?;
    out.write(
        "study.gp",
        &gnuplot_script("study.csv", "discrepancy upper end", "a", "discrepancy", &[(1, 7, "upper end")], true),
    )?;
    out.write_json("study.json", "discrete study", cfg, None, Some(&study), None)?;
    Ok(Status::Passed)
}
