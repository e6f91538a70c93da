// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::flow::DaeOperator;
use crate::linalg::{check_spd, norm2, sub, DenseVector, SaddleFactorization, SparseMatrix};

/// Right-hand side `f(t, x)` of the dynamic equation, as a load vector.
pub type LoadFn = Arc<dyn Fn(f64, &[f64]) -> DenseVector + Send + Sync>;
/// Constraint data `g(t)` or its derivative.
pub type ConstraintFn = Arc<dyn Fn(f64) -> DenseVector + Send + Sync>;

/// Semi-discrete constrained parabolic system
///
/// ```text
/// M u' + A u + B^T λ = f(t, u),
///                B u = g(t).
/// ```
///
/// `M` must be symmetric positive definite and `B` of full row rank; both are
/// checked at construction, where the saddle factorizations of `(A, B)` and
/// `(M, B)` are computed once.
pub struct ConstrainedSystem {
    m: SparseMatrix,
    a: SparseMatrix,
    b: SparseMatrix,
    f: LoadFn,
    g: ConstraintFn,
    gdot: ConstraintFn,
    symmetric_a: bool,
    stiff_saddle: SaddleFactorization,
    dae: DaeOperator,
    h1_stiffness: Option<SparseMatrix>,
    f_evals: AtomicUsize,
}

impl fmt::Debug for ConstrainedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstrainedSystem")
            .field("n", &self.n())
            .field("m", &self.m())
            .field("symmetric_a", &self.symmetric_a)
            .finish_non_exhaustive()
    }
}

impl ConstrainedSystem {
    pub fn new(
        m: SparseMatrix,
        a: SparseMatrix,
        b: SparseMatrix,
        f: LoadFn,
        g: ConstraintFn,
        gdot: ConstraintFn,
    ) -> Result<Self> {
        let n = m.nrows();
        check_dim("system: A rows", n, a.nrows())?;
        check_dim("system: B columns", n, b.ncols())?;
        check_spd(&m)?;
        let symmetric_a = a.is_symmetric(1e-12);
        let stiff_saddle = SaddleFactorization::new(&a, &b)?;
        let dae = DaeOperator::new(&m, &a, &b)?;
        Ok(ConstrainedSystem {
            m,
            a,
            b,
            f,
            g,
            gdot,
            symmetric_a,
            stiff_saddle,
            dae,
            h1_stiffness: None,
            f_evals: AtomicUsize::new(0),
        })
    }

    /// Attaches the stiffness part used by the discrete `H^1` norm `e^T (K + M) e`.
    pub fn with_h1_stiffness(mut self, k: SparseMatrix) -> Result<Self> {
        check_dim("h1 stiffness", self.n(), k.nrows())?;
        check_dim("h1 stiffness", self.n(), k.ncols())?;
        self.h1_stiffness = Some(k);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.nrows()
    }

    pub fn mass(&self) -> &SparseMatrix {
        &self.m
    }

    pub fn stiffness(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn constraint(&self) -> &SparseMatrix {
        &self.b
    }

    pub fn h1_stiffness(&self) -> Option<&SparseMatrix> {
        self.h1_stiffness.as_ref()
    }

    pub fn symmetric_a(&self) -> bool {
        self.symmetric_a
    }

    pub fn dae_operator(&self) -> &DaeOperator {
        &self.dae
    }

    pub fn stiffness_saddle(&self) -> &SaddleFactorization {
        &self.stiff_saddle
    }

    /// Number of evaluations of `f` so far.
    pub fn f_evaluations(&self) -> usize {
        self.f_evals.load(Ordering::Relaxed)
    }

    pub fn eval_f(&self, t: f64, x: &[f64]) -> Result<DenseVector> {
        check_dim("f argument", self.n(), x.len())?;
        self.f_evals.fetch_add(1, Ordering::Relaxed);
        let v = (self.f)(t, x);
        check_dim("f value", self.n(), v.len())?;
        finite(v, "f")
    }

    pub fn eval_g(&self, t: f64) -> Result<DenseVector> {
        let v = (self.g)(t);
        check_dim("g value", self.m(), v.len())?;
        finite(v, "g")
    }

    pub fn eval_gdot(&self, t: f64) -> Result<DenseVector> {
        let v = (self.gdot)(t);
        check_dim("gdot value", self.m(), v.len())?;
        finite(v, "gdot")
    }

    /// `x = B^- rhs`: `A x + B^T ν = 0`, `B x = rhs`, so `x` is `A`-orthogonal to `ker B`.
    pub fn b_minus(&self, rhs_g: &[f64]) -> Result<DenseVector> {
        check_dim("b_minus", self.m(), rhs_g.len())?;
        if rhs_g.iter().all(|&v| v == 0.0) {
            return Ok(vec![0.0; self.n()]);
        }
        Ok(self.stiff_saddle.solve(&vec![0.0; self.n()], rhs_g)?.x)
    }

    /// `w` with `A w + B^T ν = rhs`, `B w = 0`.
    pub fn w_solve(&self, rhs: &[f64]) -> Result<DenseVector> {
        check_dim("w_solve", self.n(), rhs.len())?;
        if rhs.iter().all(|&v| v == 0.0) {
            return Ok(vec![0.0; self.n()]);
        }
        self.stiff_saddle.solve_kernel(rhs)
    }

    /// `|B u - g(t)| / (1 + |g(t)|)`.
    pub fn constraint_residual(&self, t: f64, u: &[f64]) -> Result<f64> {
        let g = self.eval_g(t)?;
        let bu = self.b.mul_vec(u)?;
        Ok(norm2(&sub(&bu, &g)) / (1.0 + norm2(&g)))
    }
}

fn finite(v: DenseVector, what: &'static str) -> Result<DenseVector> {
    if crate::linalg::all_finite(&v) {
        Ok(v)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Free-function form of [`ConstrainedSystem::b_minus`].
pub fn b_minus(sys: &ConstrainedSystem, rhs_g: &[f64]) -> Result<DenseVector> {
    sys.b_minus(rhs_g)
}

/// Free-function form of [`ConstrainedSystem::w_solve`].
pub fn w_solve(sys: &ConstrainedSystem, rhs: &[f64]) -> Result<DenseVector> {
    sys.w_solve(rhs)
}
