// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

//! Heat equation on the unit square with a dynamic boundary condition on the
//! bottom edge, written as a constrained system for `x = (u, p)`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integrators::ConstrainedSystem;
use crate::linalg::SparseMatrix;
use crate::problems::fem::{p1_matrices, q1_matrices};
use crate::problems::{KeyValueConfig, Problem};

#[derive(Clone, Debug, PartialEq)]
pub struct DynBcConfig {
    /// Mesh parameter, `h = 1/n`.
    pub n: usize,
    pub kappa: f64,
    pub alpha: f64,
    pub t_end: f64,
}

impl Default for DynBcConfig {
    fn default() -> Self {
        DynBcConfig {
            n: 32,
            kappa: 0.02,
            alpha: 1.0,
            t_end: 0.7,
        }
    }
}

impl DynBcConfig {
    pub fn with_mesh(n: usize) -> Self {
        DynBcConfig {
            n,
            ..Self::default()
        }
    }

    pub fn from_config(c: &KeyValueConfig) -> Result<Self> {
        let d = Self::default();
        let cfg = DynBcConfig {
            n: c.mesh_parameter()?.unwrap_or(d.n),
            kappa: c.get_real("kappa")?.unwrap_or(d.kappa),
            alpha: c.get_real("alpha")?.unwrap_or(d.alpha),
            t_end: c.get_real("t_end")?.unwrap_or(d.t_end),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::InvalidConfig(format!(
                "dynbc needs N >= 4, got {}",
                self.n
            )));
        }
        if !(self.kappa > 0.0 && self.alpha > 0.0 && self.t_end > 0.0) {
            return Err(Error::InvalidConfig(
                "dynbc needs kappa, alpha, t_end > 0".into(),
            ));
        }
        Ok(())
    }

    /// Number of `u` unknowns: interior nodes plus the free nodes of the dynamic boundary.
    pub fn u_dim(&self) -> usize {
        (self.n - 1) * self.n
    }

    pub fn p_dim(&self) -> usize {
        self.n - 1
    }
}

/// Assembles the Q1 discretization; corners of the bottom edge are Dirichlet nodes.
pub fn build_dynbc(cfg: &DynBcConfig) -> Result<Problem> {
    cfg.validate()?;
    let n = cfg.n;
    let h = 1.0 / n as f64;
    let nu = cfg.u_dim();
    let np = cfg.p_dim();
    let dof = |i: usize, j: usize| (i >= 1 && i < n && j < n).then(|| j * (n - 1) + (i - 1));
    let (k_omega, m_omega) = q1_matrices(n, dof, nu);
    let (k_gamma, m_gamma) = p1_matrices(n, |i| (i >= 1 && i < n).then(|| i - 1), np);

    let m = SparseMatrix::block_diag(&[&m_omega, &m_gamma]);
    let a = SparseMatrix::block_diag(&[&k_omega.scaled(cfg.kappa), &m_gamma.scaled(cfg.alpha)]);
    let mut bt = Vec::with_capacity(2 * np);
    for k in 0..np {
        bt.push((k, dof(k + 1, 0).expect("bottom node"), 1.0));
        bt.push((k, nu + k, -1.0));
    }
    let b = SparseMatrix::from_triplets(np, nu + np, &bt);
    let h1 = SparseMatrix::block_diag(&[&k_omega, &k_gamma]);

    let xs: Vec<f64> = (1..n).map(|i| i as f64 * h).collect();
    let sin_x: Vec<f64> = xs.iter().map(|x| (2.0 * PI * x).sin()).collect();
    let mg = m_gamma.clone();
    let f = Arc::new(move |t: f64, x: &[f64]| {
        let nodal: Vec<f64> = x[nu..]
            .iter()
            .zip(&sin_x)
            .map(|(p, s)| 3.0 * (2.0 * PI * t).cos() - s - p * p * p)
            .collect();
        let mut out = vec![0.0; nu + np];
        mg.mul_vec_into(&nodal, &mut out[nu..])
            .expect("boundary load");
        out
    });
    let zero = Arc::new(move |_t: f64| vec![0.0; np]);
    let system = ConstrainedSystem::new(m, a, b, f, zero.clone(), zero)?.with_h1_stiffness(h1)?;

    let mut u0 = vec![0.0; nu + np];
    for j in 0..n {
        for i in 1..n {
            let (x, y) = (i as f64 * h, j as f64 * h);
            u0[dof(i, j).unwrap()] = (PI * x).sin() * (2.5 * PI * y).cos();
        }
    }
    for k in 0..np {
        u0[nu + k] = u0[dof(k + 1, 0).unwrap()];
    }

    Ok(Problem {
        name: "dynbc",
        label: format!("dynbc n_mesh={} kappa={} alpha={}", n, cfg.kappa, cfg.alpha),
        system,
        u0,
        t0: 0.0,
        t_end: cfg.t_end,
        exact: None,
    })
}
