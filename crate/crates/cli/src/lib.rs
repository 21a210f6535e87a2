// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: config ingestion, subcommand dispatch and output files.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{read_source, RunConfig};
use output::{sha256_hex, OutputDir, RunManifest};

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    /// Bad or missing configuration. Exit code 2.
    Config(String),
    /// The model or a numerical method failed. Exit code 1.
    Model(cas_core::Error),
    /// Output could not be written. Exit code 1.
    Io(String),
}

impl From<cas_core::Error> for Failure {
    fn from(e: cas_core::Error) -> Self {
        Failure::Model(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Model(_) | Failure::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Config(_) => "config",
            Failure::Model(_) => "model",
            Failure::Io(_) => "io",
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Config(m) | Failure::Io(m) => m.clone(),
            Failure::Model(e) => e.to_string(),
        }
    }

    /// Single line for scripts: `error kind=<kind> code=<n> message="<escaped>"`.
    pub fn machine_line(&self) -> String {
        format!("error kind={} code={} message={:?}", self.kind(), self.exit_code(), self.message())
    }
}

#[derive(Debug, Parser)]
#[command(name = "cas", version, about = "Coupler-assisted swap simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Config file, or the name of a built-in config (`reference-device`, `map-background`).
    #[arg(long, global = true, default_value = "reference-device")]
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Labeled energies, static ZZ and weak-drive swap frequencies.
    Spectrum,
    /// Closed-form and anticrossing swap rates per drive amplitude.
    CasRates,
    /// Population grid over drive detuning and plateau length.
    Chevron,
    /// Static-ZZ and efficiency maps, optionally the driven-ZZ detuning curve.
    ZzMap,
    /// Calibrate the CZ gate and report its fidelity with and without decoherence.
    CalibrateCz,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::CasRates => "cas-rates",
            Command::Chevron => "chevron",
            Command::ZzMap => "zz-map",
            Command::CalibrateCz => "calibrate-cz",
        }
    }
}

/// Run one command; returns the manifest path.
pub fn run(cli: &Cli) -> Result<PathBuf, Failure> {
    let started = Instant::now();
    let source = read_source(&cli.config)?;
    let cfg = RunConfig::parse(&source.text)?;
    let dir: &Path = cli
        .out
        .as_deref()
        .or(cfg.output_dir.as_deref())
        .ok_or_else(|| Failure::Config("no output directory: pass --out or set output_dir".into()))?;
    let mut out = OutputDir::prepare(dir)?;
    match cli.command {
        Command::Spectrum => commands::spectrum(&cfg, &mut out)?,
        Command::CasRates => commands::cas_rates(&cfg, &mut out)?,
        Command::Chevron => commands::chevron(&cfg, &mut out)?,
        Command::ZzMap => commands::zz_map(&cfg, &mut out)?,
        Command::CalibrateCz => commands::calibrate(&cfg, &mut out)?,
    }
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: cli.command.name().to_string(),
        config: source.origin,
        config_sha256: sha256_hex(source.text.as_bytes()),
        seed: cfg.seed,
        jobs: rayon::current_num_threads(),
        wall_time_s: started.elapsed().as_secs_f64(),
        files: out.files().to_vec(),
    };
    out.finish(&manifest)
}
