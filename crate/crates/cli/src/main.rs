// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! `lorentz-lab`: batch driver for certificates, ratio probes and studies.
//!
//! Exit codes: 0 success, 1 a certified inequality failed, 2 invalid
//! configuration or input, 3 resolution too coarse.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lorentz_lab::{Exec, LabError};

use commands::Status;
use config::{
    ConfigError, CpConfig, CpFlags, DiscreteConfig, DiscreteFlags, FileConfig, NormsConfig, ProbeConfig,
    ProbeFlags, WitnessBuildConfig, WitnessVerifyConfig,
};
use output::OutDir;

#[derive(Parser)]
#[command(name = "lorentz-lab", version, about = "Certified Lorentz-norm computations")]
struct Cli {
    /// TOML file with per-command sections; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default ./out).
    #[arg(long, global = true, env = "LORENTZ_LAB_OUT")]
    out: Option<PathBuf>,
    /// Run every kernel on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Invariant suite for rearrangements and Lorentz norms.
    Norms {
        #[command(subcommand)]
        command: NormsCommand,
    },
    /// Reference profile and c_p bracket.
    Cp(CpArgs),
    /// Build or verify a witness family.
    Witness {
        #[command(subcommand)]
        command: WitnessCommand,
    },
    /// Min-ratio probes over the witness span.
    Probe {
        #[command(subcommand)]
        command: ProbeCommand,
    },
    /// Discrete (torus) convergence study.
    Discrete {
        #[command(subcommand)]
        command: DiscreteCommand,
    },
}

#[derive(Subcommand)]
enum NormsCommand {
    Check {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Args)]
struct CpArgs {
    #[arg(long)]
    p: Option<f64>,
    /// Right end X of the grid [0, X].
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    cells: Option<usize>,
    /// Fail with exit 3 when the bracket is wider.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Admit p = 2.
    #[arg(long)]
    allow_boundary: bool,
}

#[derive(Subcommand)]
enum WitnessCommand {
    Build {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        levels: Option<usize>,
    },
    Verify {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Certificate to check (default <out>/witness.json).
        #[arg(long)]
        certificate: Option<String>,
    },
}

#[derive(Subcommand)]
enum ProbeCommand {
    Ratios {
        /// lorentz or lebesgue.
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        kmax: Option<usize>,
        /// Objective evaluations per k.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        certificate: Option<String>,
    },
}

#[derive(Subcommand)]
enum DiscreteCommand {
    Study {
        #[arg(long)]
        p: Option<f64>,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<u64>>,
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
    },
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let out_dir = cli
        .out
        .clone()
        .or_else(|| file.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };

    // Resolve and validate before touching the output directory.
    match cli.command {
        Command::Norms {
            command: NormsCommand::Check { seed, samples },
        } => {
            let cfg = NormsConfig::resolve(&file.norms, seed, samples)?;
            commands::norms_check(&OutDir::create(&out_dir)?, &cfg, exec)
        }
        Command::Cp(a) => {
            let cfg = CpConfig::resolve(
                &file.cp,
                CpFlags {
                    p: a.p,
                    cutoff: a.cutoff,
                    cells: a.cells,
                    tolerance: a.tolerance,
                    allow_boundary: a.allow_boundary,
                },
            )?;
            commands::cp(&OutDir::create(&out_dir)?, &cfg, exec)
        }
        Command::Witness {
            command: WitnessCommand::Build { p, eps, levels },
        } => {
            let cfg = WitnessBuildConfig::resolve(&file.witness, p, eps, levels)?;
            commands::witness_build(&OutDir::create(&out_dir)?, &cfg, exec)
        }
        Command::Witness {
            command: WitnessCommand::Verify {
                samples,
                seed,
                certificate,
            },
        } => {
            let cfg = WitnessVerifyConfig::resolve(&file.witness, samples, seed, certificate, &out_dir)?;
            commands::witness_verify(&OutDir::create(&out_dir)?, &cfg, exec)
        }
        Command::Probe {
            command:
                ProbeCommand::Ratios {
                    target,
                    kmax,
                    budget,
                    seed,
                    certificate,
                },
        } => {
            let cfg = ProbeConfig::resolve(
                &file.probe,
                ProbeFlags {
                    target,
                    kmax,
                    budget,
                    seed,
                    certificate,
                },
                &out_dir,
            )?;
            commands::probe_ratios(&OutDir::create(&out_dir)?, &cfg, exec)
        }
        Command::Discrete {
            command: DiscreteCommand::Study { p, scales, gammas },
        } => {
            let cfg = DiscreteConfig::resolve(&file.discrete, DiscreteFlags { p, scales, gammas })?;
            commands::discrete_study(&OutDir::create(&out_dir)?, &cfg, exec)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<LabError>() {
        Some(LabError::Uncertified(_)) => 1,
        Some(LabError::Unresolved { .. }) => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Passed) => ExitCode::SUCCESS,
        Ok(Status::Failed) => {
            eprintln!("error: a certified inequality failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
