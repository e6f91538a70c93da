// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use expint_dae::harness::{
    emit_csv, error_norm, run_convergence, ConvergenceTable, Norm, StudyConfig,
};
use expint_dae::integrators::{
    integrate, write_states_binary, write_trajectory_csv, Record, Scheme, SchemeConfig,
};
use expint_dae::linalg::sub;
use expint_dae::problems::{describe_problems, parse_real, KeyValueConfig, Problem, ProblemSpec};
use expint_dae::{Error, Result};

use crate::args::{Common, ConvergeArgs, SolveArgs};

/// Settings from the config file, or empty without one. Read errors count as invalid configuration.
pub fn load_settings(path: Option<&Path>) -> Result<KeyValueConfig> {
    match path {
        None => Ok(KeyValueConfig::new()),
        Some(p) => KeyValueConfig::from_file(p).map_err(|e| match e {
            Error::Io(io) => Error::InvalidConfig(format!("cannot read {}: {io}", p.display())),
            other => other,
        }),
    }
}

fn set_opt(cfg: &mut KeyValueConfig, key: &str, value: &Option<String>) {
    if let Some(v) = value {
        cfg.set(key, v.clone());
    }
}

fn apply_common(cfg: &mut KeyValueConfig, c: &Common) {
    set_opt(cfg, "problem", &c.problem);
    if let Some(h) = &c.h {
        // `h` and `n_mesh` are alternatives; the flag replaces either.
        cfg.remove("n_mesh");
        cfg.set("h", h.clone());
    }
    set_opt(cfg, "t_end", &c.t_end);
    set_opt(cfg, "scheme", &c.scheme);
    set_opt(cfg, "c2", &c.c2);
    set_opt(cfg, "theta", &c.theta);
    set_opt(cfg, "flow_tol", &c.flow_tol);
    set_opt(cfg, "max_substeps", &c.max_substeps);
    if let Some(out) = &c.out {
        cfg.set("out", out.display().to_string());
    }
}

fn require<'a>(cfg: &'a KeyValueConfig, key: &str) -> Result<&'a str> {
    cfg.get(key).filter(|v| !v.is_empty()).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "missing `{key}` (flag --{} or config key)",
            key.replace('_', "-")
        ))
    })
}

fn problem_spec(cfg: &KeyValueConfig) -> Result<ProblemSpec> {
    let name = require(cfg, "problem")?.to_string();
    let spec = ProblemSpec::from_config(&name, cfg)?;
    if matches!(spec, ProblemSpec::Toy(_)) && (cfg.contains("h") || cfg.contains("n_mesh")) {
        log::warn!("toy problem has no mesh; ignoring h");
    }
    Ok(spec)
}

fn scheme_config(cfg: &KeyValueConfig) -> Result<SchemeConfig> {
    let c2 = cfg.get_real("c2")?;
    let theta = cfg.get_real("theta")?;
    let scheme = Scheme::from_id(require(cfg, "scheme")?, c2, theta)?;
    let mut sc = SchemeConfig::new(scheme);
    if let Some(tol) = cfg.get_real("flow_tol")? {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "flow_tol must be positive, got {tol}"
            )));
        }
        sc = sc.with_flow_tol(tol);
    }
    if let Some(k) = cfg.get_parsed::<usize>("max_substeps")? {
        sc.flow.max_substeps = k;
    }
    Ok(sc)
}

fn out_path(cfg: &KeyValueConfig) -> Result<PathBuf> {
    require(cfg, "out").map(PathBuf::from)
}

fn describe(problem: &Problem) -> String {
    format!(
        "{} (n = {}, m = {})",
        problem.label,
        problem.system.n(),
        problem.system.m()
    )
}

pub fn solve(mut cfg: KeyValueConfig, args: &SolveArgs) -> Result<()> {
    apply_common(&mut cfg, &args.common);
    set_opt(&mut cfg, "tau", &args.tau);
    let spec = problem_spec(&cfg)?;
    let scheme = scheme_config(&cfg)?;
    let tau = parse_real(require(&cfg, "tau")?)?;
    let out = out_path(&cfg)?;
    let problem = spec.build()?;
    log::info!("solving {} with {}", describe(&problem), scheme.scheme);

    let record = if args.states.is_some() {
        Record::All
    } else {
        Record::FinalOnly
    };
    let traj = integrate(
        &problem.system,
        &scheme,
        &problem.u0,
        problem.t0,
        problem.t_end,
        tau,
        record,
    )?;
    write_trajectory_csv(&out, &traj.records)?;
    if let Some(path) = &args.states {
        write_states_binary(path, &traj.states)?;
    }

    println!("problem: {}", describe(&problem));
    println!("scheme: {}", scheme.scheme);
    println!(
        "steps: {} (tau = {tau:e}, t_end = {})",
        traj.steps(),
        problem.t_end
    );
    println!(
        "max constraint residual: {:.3e}",
        traj.max_constraint_residual()
    );
    println!(
        "flow: {} calls, max basis {}, {} substeps",
        traj.stats.flows, traj.stats.max_basis_size, traj.stats.total_substeps
    );
    if let Some(exact) = &problem.exact {
        let e = sub(&traj.final_state.u, &exact(problem.t_end));
        println!(
            "l2 error vs exact solution: {:.6e}",
            error_norm(&problem.system, &e, Norm::L2)?
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}

pub fn converge(mut cfg: KeyValueConfig, args: &ConvergeArgs) -> Result<()> {
    apply_common(&mut cfg, &args.common);
    set_opt(&mut cfg, "taus", &args.taus);
    set_opt(&mut cfg, "norm", &args.norm);
    set_opt(&mut cfg, "ref_tau", &args.ref_tau);
    if let Some(dir) = &args.cache_dir {
        cfg.set("cache_dir", dir.display().to_string());
    }
    if args.no_self_check {
        cfg.set("self_check", "false");
    }
    let spec = problem_spec(&cfg)?;
    let scheme = scheme_config(&cfg)?;
    let taus = cfg
        .get_real_list("taus")?
        .ok_or_else(|| Error::InvalidConfig("missing `taus` (flag --taus or config key)".into()))?;
    let norm = match cfg.get("norm") {
        Some(n) => n.parse()?,
        None => spec.default_norm(),
    };
    let out = out_path(&cfg)?;
    let problem = spec.build()?;

    let mut study = StudyConfig::new(scheme, taus, norm);
    study.tau_ref = cfg.get_real("ref_tau")?;
    study.cache_dir = cfg.get("cache_dir").map(PathBuf::from);
    study.self_check = cfg.get_parsed("self_check")?.unwrap_or(true);
    log::info!(
        "convergence study for {} with {}",
        describe(&problem),
        study.scheme.scheme
    );

    let (table, report) = run_convergence(&problem, &study)?;
    emit_csv(&table, &out)?;
    print_table(&table);
    if let Some(tau_ref) = report.tau_ref {
        println!("reference step: {tau_ref:e}");
    }
    if let Some(d) = report.reference_difference {
        println!("reference self-check difference: {d:.3e}");
    }
    println!(
        "max constraint residual: {:.3e}",
        report.max_constraint_residual
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn print_table(t: &ConvergenceTable) {
    println!("problem: {}", t.problem);
    println!("scheme: {}  norm: {}", t.scheme, t.norm);
    println!("{:>14} {:>14} {:>8}", "tau", "error", "order");
    for r in &t.rows {
        let lo = r
            .local_order
            .map_or(String::from("-"), |v| format!("{v:.3}"));
        println!("{:>14.6e} {:>14.6e} {:>8}", r.tau, r.error, lo);
    }
    match t.fitted_order {
        Some(p) => println!("fitted order: {p:.4}"),
        None => println!("fitted order: n/a"),
    }
}

pub fn list_problems() {
    for (name, text) in describe_problems() {
        println!("{name:<8} {text}");
    }
}
