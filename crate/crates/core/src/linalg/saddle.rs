// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

//! Factorization and solution of saddle-point systems
//!
//! ```text
//! [ S  B^T ] [ x  ]   [ f ]
//! [ B   0  ] [ nu ] = [ g ]
//! ```
//!
//! The block matrix is assembled once, reordered for small bandwidth and
//! factored with partial pivoting. The factorization is immutable, so
//! concurrent solves against one instance are fine.

use crate::error::{check_dim, Result};
use crate::linalg::band::BandLu;
use crate::linalg::{DenseVector, SparseMatrix};

/// Reusable factorization of `[S B^T; B 0]`.
#[derive(Clone, Debug)]
pub struct SaddleFactorization {
    n: usize,
    m: usize,
    s: SparseMatrix,
    b: SparseMatrix,
    lu: BandLu,
}

/// Primal part and Lagrange multiplier of a saddle solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SaddleSolution {
    pub x: DenseVector,
    pub multiplier: DenseVector,
}

impl SaddleFactorization {
    /// Assembles and factors `[S B^T; B 0]`.
    ///
    /// Fails with `SingularSaddle` if `B` is rank deficient or `S` is not
    /// invertible on the kernel of `B`.
    pub fn new(s: &SparseMatrix, b: &SparseMatrix) -> Result<Self> {
        let n = s.nrows();
        check_dim("saddle: S columns", n, s.ncols())?;
        check_dim("saddle: B columns", n, b.ncols())?;
        let m = b.nrows();
        if m > n {
            return Err(crate::Error::InvalidConfig(format!(
                "constraint count {m} exceeds primal dimension {n}"
            )));
        }
        let bt = b.transpose();
        let block = SparseMatrix::from_blocks(
            &[n, m],
            &[n, m],
            &[&[Some(s), Some(&bt)], &[Some(b), None]],
        )?;
        let lu = BandLu::factor(&block)?;
        Ok(SaddleFactorization {
            n,
            m,
            s: s.clone(),
            b: b.clone(),
            lu,
        })
    }

    pub fn primal_dim(&self) -> usize {
        self.n
    }

    pub fn constraint_dim(&self) -> usize {
        self.m
    }

    /// The (1,1) block `S`.
    pub fn primal_block(&self) -> &SparseMatrix {
        &self.s
    }

    pub fn constraint_block(&self) -> &SparseMatrix {
        &self.b
    }

    /// Bandwidths of the reordered block matrix.
    pub fn bandwidths(&self) -> (usize, usize) {
        self.lu.bandwidths()
    }

    /// Solves `S x + B^T nu = rhs_primal`, `B x = rhs_constraint`.
    pub fn solve(&self, rhs_primal: &[f64], rhs_constraint: &[f64]) -> Result<SaddleSolution> {
        check_dim("saddle_solve primal rhs", self.n, rhs_primal.len())?;
        check_dim("saddle_solve constraint rhs", self.m, rhs_constraint.len())?;
        let mut rhs = Vec::with_capacity(self.n + self.m);
        rhs.extend_from_slice(rhs_primal);
        rhs.extend_from_slice(rhs_constraint);
        self.lu.solve_in_place(&mut rhs);
        let multiplier = rhs.split_off(self.n);
        Ok(SaddleSolution { x: rhs, multiplier })
    }

    /// Solve with homogeneous constraint row, returning only the primal part.
    pub fn solve_kernel(&self, rhs_primal: &[f64]) -> Result<DenseVector> {
        let zeros = vec![0.0; self.m];
        Ok(self.solve(rhs_primal, &zeros)?.x)
    }

    /// Relative residuals `(|S x + B^T nu - f| / max(|f|, |S x|), |B x - g| / max(|g|, |B| |x|))`.
    pub fn residuals(
        &self,
        sol: &SaddleSolution,
        rhs_primal: &[f64],
        rhs_constraint: &[f64],
    ) -> Result<(f64, f64)> {
        use crate::linalg::{norm2, sub};
        let sx = self.s.mul_vec(&sol.x)?;
        let btnu = self.b.mul_transpose_vec(&sol.multiplier)?;
        let lhs1: Vec<f64> = sx.iter().zip(&btnu).map(|(a, b)| a + b).collect();
        let r1 = norm2(&sub(&lhs1, rhs_primal));
        let s1 = norm2(rhs_primal)
            .max(norm2(&sx))
            .max(norm2(&btnu))
            .max(f64::MIN_POSITIVE);
        let bx = self.b.mul_vec(&sol.x)?;
        let r2 = norm2(&sub(&bx, rhs_constraint));
        let s2 = norm2(rhs_constraint)
            .max(self.b.max_abs() * norm2(&sol.x))
            .max(f64::MIN_POSITIVE);
        Ok((r1 / s1, r2 / s2))
    }
}

/// Factors `[S B^T; B 0]`.
pub fn assemble_saddle(s: &SparseMatrix, b: &SparseMatrix) -> Result<SaddleFactorization> {
    SaddleFactorization::new(s, b)
}

/// Solves a factored saddle system.
pub fn saddle_solve(
    f: &SaddleFactorization,
    rhs_primal: &[f64],
    rhs_constraint: &[f64],
) -> Result<SaddleSolution> {
    f.solve(rhs_primal, rhs_constraint)
}

/// `M`-orthogonal projection of `x` onto `ker B`, for a factorization built from `(M, B)`.
///
/// Solves `M p + B^T mu = M x`, `B p = 0`.
pub fn kernel_project(fm: &SaddleFactorization, x: &[f64]) -> Result<DenseVector> {
    check_dim("kernel_project", fm.n, x.len())?;
    if fm.m == 0 {
        return Ok(x.to_vec());
    }
    let mx = fm.s.mul_vec(x)?;
    fm.solve_kernel(&mx)
}
