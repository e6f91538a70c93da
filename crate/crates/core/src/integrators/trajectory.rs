// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{check_dim, Error, Result};
use crate::integrators::{ConstrainedSystem, FlowStats, SchemeConfig, StepState, Stepper};
use crate::linalg::{norm2, DenseVector};

/// Per-step diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    /// `|B u_n - g(t_n)| / (1 + |g(t_n)|)`.
    pub constraint_residual: f64,
    pub solution_norm: f64,
}

/// Which states `integrate` keeps in memory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Record {
    #[default]
    FinalOnly,
    All,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// `u_0, …, u_N` when recording all states, otherwise empty.
    pub states: Vec<DenseVector>,
    pub records: Vec<StepRecord>,
    pub final_state: StepState,
    pub stats: FlowStats,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn max_constraint_residual(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.constraint_residual)
            .fold(0.0, f64::max)
    }
}

/// Number of steps `N` with `N τ = t_end - t0`; rejects step sizes that do not divide the interval.
/// An empty interval gives zero steps.
pub fn step_count(t0: f64, t_end: f64, tau: f64) -> Result<usize> {
    let len = t_end - t0;
    if !(tau > 0.0) || !tau.is_finite() || !(len >= 0.0) || !len.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "need tau > 0 and t_end >= t0, got tau = {tau}, [{t0}, {t_end}]"
        )));
    }
    if len == 0.0 {
        return Ok(0);
    }
    let n = (len / tau).round();
    if n < 1.0 || (n * tau - len).abs() > 1e-9 * len.max(1.0) {
        return Err(Error::InvalidConfig(format!(
            "step size {tau} does not divide the interval length {len}"
        )));
    }
    Ok(n as usize)
}

/// Integrates from `(t0, u0)` to `t_end` with constant step `tau`.
///
/// `u0` must satisfy `B u0 = g(t0)` to the configured relative tolerance.
pub fn integrate(
    sys: &ConstrainedSystem,
    cfg: &SchemeConfig,
    u0: &[f64],
    t0: f64,
    t_end: f64,
    tau: f64,
    record: Record,
) -> Result<Trajectory> {
    check_dim("initial value", sys.n(), u0.len())?;
    let steps = step_count(t0, t_end, tau)?;
    let residual = sys.constraint_residual(t0, u0)?;
    if residual > cfg.consistency_tol {
        return Err(Error::InconsistentInitialData { residual });
    }
    let mut stepper = Stepper::new(sys, cfg.clone())?;
    let mut state = StepState::new(sys, t0, u0.to_vec())?;
    let mut records = Vec::with_capacity(steps + 1);
    let mut states = Vec::new();
    records.push(StepRecord {
        step: 0,
        t: t0,
        constraint_residual: residual,
        solution_norm: norm2(u0),
    });
    if record == Record::All {
        states.push(u0.to_vec());
    }
    let h = (t_end - t0) / steps as f64;
    for k in 1..=steps {
        let mut next = stepper.step(&state, h)?;
        // Pin the time grid to avoid accumulated round-off in t.
        next.t = if k == steps { t_end } else { t0 + k as f64 * h };
        if !crate::linalg::all_finite(&next.u) {
            return Err(Error::NonFinite("solution"));
        }
        let residual = sys.constraint_residual(next.t, &next.u)?;
        records.push(StepRecord {
            step: k,
            t: next.t,
            constraint_residual: residual,
            solution_norm: norm2(&next.u),
        });
        if record == Record::All {
            states.push(next.u.clone());
        }
        state = next;
    }
    let stats = stepper.stats();
    log::debug!(
        "{} steps of {}: max basis {}, substeps {}, max drift {:.2e}",
        steps,
        cfg.scheme,
        stats.max_basis_size,
        stats.total_substeps,
        stats.max_drift
    );
    Ok(Trajectory {
        states,
        records,
        final_state: state,
        stats,
    })
}

/// Writes `step,t,constraint_residual,solution_norm`, one row per time node.
pub fn write_trajectory_csv(path: &Path, records: &[StepRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_trajectory_csv_to(&mut w, records)?;
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_csv_to<W: Write>(w: &mut W, records: &[StepRecord]) -> Result<()> {
    writeln!(w, "step,t,constraint_residual,solution_norm")?;
    for r in records {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e}",
            r.step, r.t, r.constraint_residual, r.solution_norm
        )?;
    }
    Ok(())
}

/// Binary dump: little-endian `u64` state dimension, `u64` state count, then the states as `f64`.
pub fn write_states_binary(path: &Path, states: &[DenseVector]) -> Result<()> {
    let n = states.first().map_or(0, Vec::len);
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&(states.len() as u64).to_le_bytes())?;
    for s in states {
        check_dim("binary dump", n, s.len())?;
        for v in s {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_states_binary(path: &Path) -> Result<Vec<DenseVector>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let count = u64::from_le_bytes(word) as usize;
    let mut states = Vec::with_capacity(count);
    for _ in 0..count {
        let mut s = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut word)?;
            s.push(f64::from_le_bytes(word));
        }
        states.push(s);
    }
    Ok(states)
}
