// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! File configuration, flag overrides and range validation.
//!
//! Every command resolves to a plain struct that is echoed verbatim into its
//! artifacts. Precedence is flag, then config file, then built-in default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// A configuration problem; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(field: &str, reason: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("invalid value for `{field}`: {reason}"))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub norms: NormsFile,
    #[serde(default)]
    pub cp: CpFile,
    #[serde(default)]
    pub witness: WitnessFile,
    #[serde(default)]
    pub probe: ProbeFile,
    #[serde(default)]
    pub discrete: DiscreteFile,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("config {}: {e}", path.display())))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsFile {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpFile {
    pub p: Option<f64>,
    pub cutoff: Option<f64>,
    pub cells: Option<usize>,
    pub tolerance: Option<f64>,
    pub allow_boundary: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessFile {
    pub p: Option<f64>,
    pub eps: Option<f64>,
    pub levels: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub certificate: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeFile {
    pub target: Option<String>,
    pub kmax: Option<usize>,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub certificate: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteFile {
    pub p: Option<f64>,
    pub scales: Option<Vec<u64>>,
    pub gammas: Option<Vec<f64>>,
    pub cutoff: Option<f64>,
    pub cells: Option<usize>,
    pub per_scale: Option<u64>,
    pub min_cutoff: Option<u64>,
}

fn check_p(p: f64, allow_boundary: bool) -> Result<(), ConfigError> {
    let ok = p > 1.0 && (p < 2.0 || (allow_boundary && p == 2.0));
    if ok {
        Ok(())
    } else if allow_boundary {
        Err(invalid("p", format!("must lie in (1, 2], got {p}")))
    } else {
        Err(invalid("p", format!("must lie in (1, 2), got {p}")))
    }
}

fn check_positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

fn check_count(field: &str, v: usize, min: usize) -> Result<(), ConfigError> {
    if v >= min {
        Ok(())
    } else {
        Err(invalid(field, format!("must be at least {min}, got {v}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormsConfig {
    pub seed: u64,
    pub samples: usize,
}

impl NormsConfig {
    pub fn resolve(file: &NormsFile, seed: Option<u64>, samples: Option<usize>) -> Result<Self, ConfigError> {
        let c = NormsConfig {
            seed: seed.or(file.seed).unwrap_or(1),
            samples: samples.or(file.samples).unwrap_or(200),
        };
        check_count("samples", c.samples, 1)?;
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CpConfig {
    pub p: f64,
    pub cutoff: f64,
    pub cells: usize,
    pub tolerance: Option<f64>,
    pub allow_boundary: bool,
}

pub struct CpFlags {
    pub p: Option<f64>,
    pub cutoff: Option<f64>,
    pub cells: Option<usize>,
    pub tolerance: Option<f64>,
    pub allow_boundary: bool,
}

impl CpConfig {
    pub fn resolve(file: &CpFile, flags: CpFlags) -> Result<Self, ConfigError> {
        let c = CpConfig {
            p: flags.p.or(file.p).unwrap_or(1.5),
            cutoff: flags.cutoff.or(file.cutoff).unwrap_or(400.0),
            cells: flags.cells.or(file.cells).unwrap_or(1 << 16),
            tolerance: flags.tolerance.or(file.tolerance),
            allow_boundary: flags.allow_boundary || file.allow_boundary.unwrap_or(false),
        };
        check_p(c.p, c.allow_boundary)?;
        check_positive("cutoff", c.cutoff)?;
        check_count("cells", c.cells, 2)?;
        if let Some(t) = c.tolerance {
            check_positive("tolerance", t)?;
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessBuildConfig {
    pub p: f64,
    pub eps: f64,
    pub levels: usize,
}

impl WitnessBuildConfig {
    pub fn resolve(
        file: &WitnessFile,
        p: Option<f64>,
        eps: Option<f64>,
        levels: Option<usize>,
    ) -> Result<Self, ConfigError> {
        let c = WitnessBuildConfig {
            p: p.or(file.p).unwrap_or(1.5),
            eps: eps.or(file.eps).unwrap_or(0.25),
            levels: levels.or(file.levels).unwrap_or(4),
        };
        check_p(c.p, false)?;
        if !(c.eps > 0.0 && c.eps < 1.0) {
            return Err(invalid("eps", format!("must lie in (0, 1), got {}", c.eps)));
        }
        check_count("levels", c.levels, 1)?;
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessVerifyConfig {
    pub samples: usize,
    pub seed: u64,
    pub certificate: String,
}

impl WitnessVerifyConfig {
    pub fn resolve(
        file: &WitnessFile,
        samples: Option<usize>,
        seed: Option<u64>,
        certificate: Option<String>,
        out_dir: &Path,
    ) -> Result<Self, ConfigError> {
        let c = WitnessVerifyConfig {
            samples: samples.or(file.samples).unwrap_or(200),
            seed: seed.or(file.seed).unwrap_or(0),
            certificate: certificate
                .or_else(|| file.certificate.clone())
                .unwrap_or_else(|| default_certificate(out_dir)),
        };
        check_count("samples", c.samples, 1)?;
        Ok(c)
    }
}

fn default_certificate(out_dir: &Path) -> String {
    out_dir.join("witness.json").display().to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeConfig {
    pub target: String,
    pub kmax: usize,
    pub budget: usize,
    pub seed: u64,
    pub certificate: String,
}

pub struct ProbeFlags {
    pub target: Option<String>,
    pub kmax: Option<usize>,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub certificate: Option<String>,
}

impl ProbeConfig {
    pub fn resolve(file: &ProbeFile, flags: ProbeFlags, out_dir: &Path) -> Result<Self, ConfigError> {
        let c = ProbeConfig {
            target: flags
                .target
                .or_else(|| file.target.clone())
                .unwrap_or_else(|| "lorentz".into()),
            kmax: flags.kmax.or(file.kmax).unwrap_or(16),
            budget: flags.budget.or(file.budget).unwrap_or(4000),
            seed: flags.seed.or(file.seed).unwrap_or(11),
            certificate: flags
                .certificate
                .or_else(|| file.certificate.clone())
                .unwrap_or_else(|| default_certificate(out_dir)),
        };
        if c.target != "lorentz" && c.target != "lebesgue" {
            return Err(invalid("target", format!("expected lorentz or lebesgue, got {}", c.target)));
        }
        check_count("kmax", c.kmax, 1)?;
        check_count("budget", c.budget, 1)?;
        Ok(c)
    }

    /// `1, 2, 4, ...` up to `kmax`, with `kmax` itself appended.
    pub fn ladder(&self) -> Vec<usize> {
        let mut ks: Vec<usize> = std::iter::successors(Some(1usize), |k| k.checked_mul(2))
            .take_while(|&k| k <= self.kmax)
            .collect();
        if ks.last() != Some(&self.kmax) {
            ks.push(self.kmax);
        }
        ks
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteConfig {
    pub p: f64,
    pub scales: Vec<u64>,
    pub gammas: Vec<f64>,
    pub cutoff: f64,
    pub cells: usize,
    pub per_scale: u64,
    pub min_cutoff: u64,
}

pub struct DiscreteFlags {
    pub p: Option<f64>,
    pub scales: Option<Vec<u64>>,
    pub gammas: Option<Vec<f64>>,
}

impl DiscreteConfig {
    pub fn resolve(file: &DiscreteFile, flags: DiscreteFlags) -> Result<Self, ConfigError> {
        let c = DiscreteConfig {
            p: flags.p.or(file.p).unwrap_or(1.5),
            scales: flags
                .scales
                .or_else(|| file.scales.clone())
                .unwrap_or_else(|| vec![16, 64, 256, 1024]),
            gammas: flags
                .gammas
                .or_else(|| file.gammas.clone())
                .unwrap_or_else(|| vec![0.1, 0.05]),
            cutoff: file.cutoff.unwrap_or(400.0),
            cells: file.cells.unwrap_or(1 << 16),
            per_scale: file.per_scale.unwrap_or(64),
            min_cutoff: file.min_cutoff.unwrap_or(4096),
        };
        check_p(c.p, false)?;
        if c.scales.is_empty() || c.scales.contains(&0) {
            return Err(invalid("scales", "need at least one scale, all >= 1"));
        }
        if c.scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("scales", "must be strictly increasing"));
        }
        for &g in &c.gammas {
            check_positive("gammas", g)?;
        }
        check_positive("cutoff", c.cutoff)?;
        check_count("cells", c.cells, 2)?;
        if c.per_scale == 0 && c.min_cutoff == 0 {
            return Err(invalid("min_cutoff", "per_scale and min_cutoff cannot both be 0"));
        }
        Ok(c)
    }
}
