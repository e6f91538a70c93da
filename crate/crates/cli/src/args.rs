// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Exponential integrators for constrained parabolic systems.
#[derive(Debug, Parser)]
#[command(name = "expint-dae", version, about)]
pub struct Cli {
    /// key = value file supplying defaults; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrates one problem with a fixed step size and writes the step log as CSV.
    Solve(SolveArgs),
    /// Runs a convergence study over a list of step sizes and writes the error table as CSV.
    Converge(ConvergeArgs),
    /// Lists the registered problems and their parameters.
    ListProblems,
}

/// Options shared by `solve` and `converge`.
#[derive(Debug, Args)]
pub struct Common {
    /// Problem name (see `list-problems`).
    #[arg(long)]
    pub problem: Option<String>,
    /// Mesh size as 1/N, e.g. `1/32`.
    #[arg(long)]
    pub h: Option<String>,
    /// Final time.
    #[arg(long)]
    pub t_end: Option<String>,
    /// exp-euler, second-order, second-order-family or alt-euler.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Stage node of second-order-family.
    #[arg(long)]
    pub c2: Option<String>,
    /// Constraint weight of alt-euler.
    #[arg(long)]
    pub theta: Option<String>,
    /// Krylov flow tolerance relative to the initial vector.
    #[arg(long)]
    pub flow_tol: Option<String>,
    /// Substep limit of the Krylov flow.
    #[arg(long)]
    pub max_substeps: Option<String>,
    /// Output CSV path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Step size.
    #[arg(long)]
    pub tau: Option<String>,
    /// Also dump every state vector in binary form.
    #[arg(long, value_name = "PATH")]
    pub states: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated step sizes, largest first.
    #[arg(long)]
    pub taus: Option<String>,
    /// energy, h1 or l2; defaults to the problem's norm.
    #[arg(long)]
    pub norm: Option<String>,
    /// Reference step size; at most the smallest step over 16.
    #[arg(long)]
    pub ref_tau: Option<String>,
    /// Directory for cached reference solutions.
    #[arg(long, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Skip the reference self-check at half the reference step.
    #[arg(long)]
    pub no_self_check: bool,
}
