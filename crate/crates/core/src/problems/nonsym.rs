// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

//! Coupled 1D reaction-diffusion pair with a non-symmetric second-order coupling
//! and a time-dependent constraint at `x = 1`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integrators::ConstrainedSystem;
use crate::linalg::SparseMatrix;
use crate::problems::fem::p1_matrices;
use crate::problems::{KeyValueConfig, Problem};

#[derive(Clone, Debug, PartialEq)]
pub struct NonSymConfig {
    pub n: usize,
    /// Number of terms of the initial-value series.
    pub k_trunc: usize,
    pub t_end: f64,
}

impl Default for NonSymConfig {
    fn default() -> Self {
        NonSymConfig {
            n: 32,
            k_trunc: 1000,
            t_end: 1.0,
        }
    }
}

impl NonSymConfig {
    pub fn with_mesh(n: usize) -> Self {
        NonSymConfig {
            n,
            ..Self::default()
        }
    }

    pub fn from_config(c: &KeyValueConfig) -> Result<Self> {
        let d = Self::default();
        let cfg = NonSymConfig {
            n: c.mesh_parameter()?.unwrap_or(d.n),
            k_trunc: c.get_parsed("k_trunc")?.unwrap_or(d.k_trunc),
            t_end: c.get_real("t_end")?.unwrap_or(d.t_end),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || self.k_trunc < 100 || !(self.t_end > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "nonsym needs N >= 4, k_trunc >= 100, t_end > 0; got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Truncated series `Σ_{k ≤ K} sin(kπx) / k^1.55`.
pub fn initial_series(x: f64, k_trunc: usize) -> f64 {
    (1..=k_trunc)
        .map(|k| (k as f64 * PI * x).sin() / (k as f64).powf(1.55))
        .sum()
}

/// P1 discretization with unknowns `(u_1..u_N, v_1..v_N)`; node 0 is Dirichlet.
pub fn build_nonsym(cfg: &NonSymConfig) -> Result<Problem> {
    cfg.validate()?;
    let n = cfg.n;
    let (k1, m1) = p1_matrices(n, |i| i.checked_sub(1), n);
    let m = SparseMatrix::block_diag(&[&m1, &m1]);
    let a = SparseMatrix::from_blocks(
        &[n, n],
        &[n, n],
        &[&[Some(&k1), Some(&k1)], &[Some(&m1), Some(&k1)]],
    )?;
    let b = SparseMatrix::from_triplets(1, 2 * n, &[(0, n - 1, 1.0), (0, 2 * n - 1, -1.0)]);
    let h1 = SparseMatrix::block_diag(&[&k1, &k1]);

    let mm = m.clone();
    let f = Arc::new(move |_t: f64, x: &[f64]| {
        let cubes: Vec<f64> = x.iter().map(|v| -v * v * v).collect();
        mm.mul_vec(&cubes).expect("cubic load")
    });
    let g = Arc::new(|t: f64| vec![(2.0 * t).exp() - 1.0]);
    let gdot = Arc::new(|t: f64| vec![2.0 * (2.0 * t).exp()]);
    let system = ConstrainedSystem::new(m, a, b, f, g, gdot)?.with_h1_stiffness(h1)?;

    let h = 1.0 / n as f64;
    let mut u0: Vec<f64> = (1..=n)
        .map(|i| initial_series(i as f64 * h, cfg.k_trunc))
        .collect();
    // sin(kπ) is not exactly zero in floating point; both fields share the same values.
    u0.extend_from_within(..);

    Ok(Problem {
        name: "nonsym",
        label: format!("nonsym n_mesh={} k_trunc={}", n, cfg.k_trunc),
        system,
        u0,
        t0: 0.0,
        t_end: cfg.t_end,
        exact: None,
    })
}
