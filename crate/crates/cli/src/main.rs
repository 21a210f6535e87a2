// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

use std::process::ExitCode;

use clap::Parser;
use log::{error, info, LevelFilter};

use cas_cli::{run, Cli, Failure};

fn main() -> ExitCode {
    env_logger::Builder::new()
        .filter_level(LevelFilter::Info)
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            let f = Failure::Config(format!("--jobs {}: {e}", cli.jobs));
            eprintln!("{}", f.machine_line());
            return ExitCode::from(f.exit_code());
        }
    }
    match run(&cli) {
        Ok(manifest) => {
            info!("wrote {}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(f) => {
            error!("{}", f.message());
            eprintln!("{}", f.machine_line());
            ExitCode::from(f.exit_code())
        }
    }
}
