// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::FlowOptions;
use crate::harness::{error_norm, ConvergenceTable, Norm};
use crate::integrators::{
    integrate, read_states_binary, write_states_binary, Record, Scheme, SchemeConfig,
};
use crate::linalg::{sub, DenseVector};
use crate::problems::Problem;

/// Final-time state of a fine second-order run.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSolution {
    pub problem: String,
    pub t_end: f64,
    pub scheme: String,
    pub tau_ref: f64,
    pub state: DenseVector,
}

/// Flow options used for reference runs.
pub fn reference_flow_options() -> FlowOptions {
    FlowOptions {
        tol: 1e-12,
        ..FlowOptions::default()
    }
}

fn cache_file(dir: &Path, problem: &Problem, tau_ref: f64) -> PathBuf {
    let key = format!(
        "{}__T={:e}__tau={:e}__second-order",
        problem.label, problem.t_end, tau_ref
    );
    let name: String = key
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "=.-_".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    dir.join(format!("{name}.bin"))
}

/// Integrates with the second-order scheme at `tau_ref`, reusing a cached result when present.
pub fn build_reference(
    problem: &Problem,
    tau_ref: f64,
    cache_dir: Option<&Path>,
) -> Result<ReferenceSolution> {
    let scheme = Scheme::SecondOrder;
    let make = |state| ReferenceSolution {
        problem: problem.label.clone(),
        t_end: problem.t_end,
        scheme: scheme.id().to_string(),
        tau_ref,
        state,
    };
    let file = cache_dir.map(|d| cache_file(d, problem, tau_ref));
    if let Some(f) = file.as_ref().filter(|f| f.exists()) {
        match read_states_binary(f) {
            Ok(mut s) if s.len() == 1 && s[0].len() == problem.system.n() => {
                log::info!("reference served from {}", f.display());
                return Ok(make(s.pop().unwrap()));
            }
            _ => log::warn!("ignoring unreadable reference cache {}", f.display()),
        }
    }
    let mut cfg = SchemeConfig::new(scheme);
    cfg.flow = reference_flow_options();
    let traj = integrate(
        &problem.system,
        &cfg,
        &problem.u0,
        problem.t0,
        problem.t_end,
        tau_ref,
        Record::FinalOnly,
    )?;
    let state = traj.final_state.u;
    if let Some(f) = &file {
        if let Some(dir) = f.parent() {
            std::fs::create_dir_all(dir)?;
        }
        // Write-then-rename so concurrent readers never see a partial file.
        let tmp = f.with_extension(format!("tmp{}", std::process::id()));
        write_states_binary(&tmp, std::slice::from_ref(&state))?;
        std::fs::rename(&tmp, f)?;
    }
    Ok(make(state))
}

/// Settings of a convergence study.
#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub scheme: SchemeConfig,
    /// Strictly decreasing step sizes.
    pub taus: Vec<f64>,
    pub norm: Norm,
    /// Reference step; defaults to the smallest step size over 16.
    pub tau_ref: Option<f64>,
    pub cache_dir: Option<PathBuf>,
    /// Compare the reference against one at `tau_ref / 2`.
    pub self_check: bool,
}

impl StudyConfig {
    pub fn new(scheme: SchemeConfig, taus: Vec<f64>, norm: Norm) -> Self {
        StudyConfig {
            scheme,
            taus,
            norm,
            tau_ref: None,
            cache_dir: None,
            self_check: true,
        }
    }
}

/// Halving ladder `tau0, tau0/2, …` with `count` entries.
pub fn halving_ladder(tau0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| tau0 / 2f64.powi(k as i32)).collect()
}

/// Measurements collected alongside the table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StudyReport {
    /// Largest per-step relative constraint residual over all runs.
    pub max_constraint_residual: f64,
    pub max_orthonormality: f64,
    pub max_relation_residual: f64,
    pub max_drift: f64,
    /// Difference between the references at `tau_ref` and `tau_ref / 2`.
    pub reference_difference: Option<f64>,
    pub tau_ref: Option<f64>,
}

/// Integrates once per step size (in parallel) and measures final-time errors.
///
/// Problems with an exact solution are measured against it; otherwise a
/// reference is built (or read from the cache).
pub fn run_convergence(
    problem: &Problem,
    study: &StudyConfig,
) -> Result<(ConvergenceTable, StudyReport)> {
    if study.taus.is_empty() {
        return Err(Error::InvalidConfig("no step sizes given".into()));
    }
    let tau_min = study.taus.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut report = StudyReport::default();
    let reference = match &problem.exact {
        Some(exact) => exact(problem.t_end),
        None => {
            let tau_ref = study.tau_ref.unwrap_or(tau_min / 16.0);
            if tau_ref > tau_min / 16.0 * (1.0 + 1e-12) {
                return Err(Error::InvalidConfig(format!(
                    "reference step {tau_ref} must be at most the smallest step size over 16"
                )));
            }
            report.tau_ref = Some(tau_ref);
            build_reference(problem, tau_ref, study.cache_dir.as_deref())?.state
        }
    };

    let runs: Vec<_> = study
        .taus
        .par_iter()
        .map(|&tau| {
            integrate(
                &problem.system,
                &study.scheme,
                &problem.u0,
                problem.t0,
                problem.t_end,
                tau,
                Record::FinalOnly,
            )
        })
        .collect::<Result<_>>()?;

    let sys = &problem.system;
    let mut errors = Vec::with_capacity(runs.len());
    for traj in &runs {
        errors.push(error_norm(
            sys,
            &sub(&traj.final_state.u, &reference),
            study.norm,
        )?);
        report.max_constraint_residual = report
            .max_constraint_residual
            .max(traj.max_constraint_residual());
        report.max_orthonormality = report.max_orthonormality.max(traj.stats.max_orthonormality);
        report.max_relation_residual = report
            .max_relation_residual
            .max(traj.stats.max_relation_residual);
        report.max_drift = report.max_drift.max(traj.stats.max_drift);
    }
    let ref_norm = error_norm(sys, &reference, study.norm)?;
    let h = problem.label.split_whitespace().find_map(|kv| {
        kv.strip_prefix("n_mesh=")
            .and_then(|n| n.parse::<f64>().ok())
            .map(|n| 1.0 / n)
    });
    let table = ConvergenceTable::new(
        problem.label.clone(),
        study.scheme.scheme.to_string(),
        study.norm,
        h,
        &study.taus,
        &errors,
        ref_norm,
    )?;

    if study.self_check {
        if let Some(tau_ref) = report.tau_ref {
            let finer = build_reference(problem, tau_ref / 2.0, study.cache_dir.as_deref())?;
            let diff = error_norm(sys, &sub(&finer.state, &reference), study.norm)?;
            report.reference_difference = Some(diff);
            let allowed = 0.01 * errors.iter().cloned().fold(f64::INFINITY, f64::min);
            if diff > allowed {
                return Err(Error::SelfCheckFailed {
                    difference: diff,
                    allowed,
                });
            }
        }
    }
    Ok((table, report))
}
