// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use expint_dae::Error;

use args::{Cli, Command};

/// 0 success, 1 I/O, 2 invalid configuration, 3 numerical failure.
fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else if matches!(e, Error::Io(_)) {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result =
        commands::load_settings(cli.config.as_deref()).and_then(|cfg| match &cli.command {
            Command::Solve(a) => commands::solve(cfg, a),
            Command::Converge(a) => commands::converge(cfg, a),
            Command::ListProblems => {
                commands::list_problems();
                Ok(())
            }
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
