// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

//! Small random constrained systems with a manufactured exact solution.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::integrators::ConstrainedSystem;
use crate::linalg::SparseMatrix;
use crate::problems::{KeyValueConfig, Problem};

#[derive(Clone, Debug, PartialEq)]
pub struct ToyConfig {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    /// `A = A^T` when set, otherwise a skew part is added.
    pub symmetric: bool,
    /// Adds the cubic term `-c x^3` to `f`.
    pub nonlinear: bool,
    pub t_end: f64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            n: 40,
            m: 3,
            seed: 1,
            symmetric: true,
            nonlinear: true,
            t_end: 1.0,
        }
    }
}

impl ToyConfig {
    pub fn from_config(c: &KeyValueConfig) -> Result<Self> {
        let d = Self::default();
        let cfg = ToyConfig {
            n: c.get_parsed("n")?.unwrap_or(d.n),
            m: c.get_parsed("m")?.unwrap_or(d.m),
            seed: c.get_parsed("seed")?.unwrap_or(d.seed),
            symmetric: c.get_parsed("symmetric")?.unwrap_or(d.symmetric),
            nonlinear: c.get_parsed("nonlinear")?.unwrap_or(d.nonlinear),
            t_end: c.get_real("t_end")?.unwrap_or(d.t_end),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m < self.n && self.n <= 200) || !(self.t_end > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "toy needs m < n <= 200 and t_end > 0; got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Scale of the random SPD part of `A`; eigenvalues land roughly in `[1, 15]`.
const STIFFNESS_SCALE: f64 = 10.0;
/// Coefficient of the cubic term when `nonlinear` is set.
const CUBIC: f64 = 0.3;

fn uniform_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

fn uniform_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

/// Manufactured solution `x*(t) = a + t b + e^{t/2} d`, `λ*(t) = l0 + sin(t) l1`.
#[derive(Clone, Debug)]
struct Manufactured {
    a: DVector<f64>,
    b: DVector<f64>,
    d: DVector<f64>,
    l0: DVector<f64>,
    l1: DVector<f64>,
}

impl Manufactured {
    fn x(&self, t: f64) -> DVector<f64> {
        &self.a + &self.b * t + &self.d * (0.5 * t).exp()
    }

    fn xdot(&self, t: f64) -> DVector<f64> {
        &self.b + &self.d * (0.5 * (0.5 * t).exp())
    }

    fn lambda(&self, t: f64) -> DVector<f64> {
        &self.l0 + &self.l1 * t.sin()
    }
}

struct ToyData {
    mass: DMatrix<f64>,
    stiff: DMatrix<f64>,
    b: DMatrix<f64>,
    sol: Manufactured,
}

fn generate(cfg: &ToyConfig) -> ToyData {
    let n = cfg.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let p = uniform_matrix(&mut rng, n, n);
    let mass = DMatrix::identity(n, n) + &p * p.transpose() / (4.0 * n as f64);
    let g = uniform_matrix(&mut rng, n, n);
    let mut stiff = DMatrix::identity(n, n) + &g * g.transpose() * (STIFFNESS_SCALE / n as f64);
    let h = uniform_matrix(&mut rng, n, n);
    if !cfg.symmetric {
        stiff += (&h - h.transpose()) * (2.0 / (n as f64).sqrt());
    }
    let b = uniform_matrix(&mut rng, cfg.m, n);
    let sol = Manufactured {
        a: uniform_vector(&mut rng, n),
        b: uniform_vector(&mut rng, n),
        d: uniform_vector(&mut rng, n),
        l0: uniform_vector(&mut rng, cfg.m),
        l1: uniform_vector(&mut rng, cfg.m),
    };
    ToyData {
        mass,
        stiff,
        b,
        sol,
    }
}

/// Builds the system together with its exact solution; `f` and `g` are
/// defined by substituting the manufactured solution.
pub fn build_toy(cfg: &ToyConfig) -> Result<Problem> {
    cfg.validate()?;
    let ToyData {
        mass,
        stiff,
        b,
        sol,
    } = generate(cfg);
    let c = if cfg.nonlinear { CUBIC } else { 0.0 };

    let (mass_f, stiff_f, bt_f, sol_f) = (mass.clone(), stiff.clone(), b.transpose(), sol.clone());
    let f = Arc::new(move |t: f64, x: &[f64]| {
        let xs = sol_f.x(t);
        let r = &mass_f * sol_f.xdot(t) + &stiff_f * &xs + &bt_f * sol_f.lambda(t);
        r.iter()
            .zip(xs.iter())
            .zip(x)
            .map(|((r, s), v)| r + c * (s * s * s - v * v * v))
            .collect()
    });
    let (b_g, sol_g) = (b.clone(), sol.clone());
    let g_fn = Arc::new(move |t: f64| (&b_g * sol_g.x(t)).as_slice().to_vec());
    let (b_gd, sol_gd) = (b.clone(), sol.clone());
    let gdot = Arc::new(move |t: f64| (&b_gd * sol_gd.xdot(t)).as_slice().to_vec());

    let system = ConstrainedSystem::new(
        SparseMatrix::from_dense(&mass),
        SparseMatrix::from_dense(&stiff),
        SparseMatrix::from_dense(&b),
        f,
        g_fn,
        gdot,
    )?;
    let u0 = sol.x(0.0).as_slice().to_vec();
    let exact = Arc::new(move |t: f64| sol.x(t).as_slice().to_vec());
    Ok(Problem {
        name: "toy",
        label: format!(
            "toy n={} m={} seed={} symmetric={} nonlinear={}",
            cfg.n, cfg.m, cfg.seed, cfg.symmetric, cfg.nonlinear
        ),
        system,
        u0,
        t0: 0.0,
        t_end: cfg.t_end,
        exact: Some(exact),
    })
}
