// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense oracles shared by the integration tests.
//!
//! The constrained flow is reduced to an ODE on `ker B`: with an orthonormal
//! kernel basis `Z` (eigenvectors of `B^T B` for the zero eigenvalue),
//! `x = Z y` and `(Z^T M Z) y' + (Z^T A Z) y = Z^T r`. The matrix exponential
//! comes from nalgebra, not from the crate under test.

#![allow(dead_code)]

use expint_dae::linalg::SparseMatrix;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn kernel_basis(b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = b.ncols();
    let m = b.nrows();
    if m == 0 {
        return DMatrix::identity(n, n);
    }
    let eig = SymmetricEigen::new(b.transpose() * b);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let cols: Vec<DVector<f64>> = idx[..n - m]
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    DMatrix::from_columns(&cols)
}

/// Reduced operator `R = -(Z^T M Z)^{-1} Z^T A Z` and the basis `Z`.
pub struct KernelReduction {
    pub z: DMatrix<f64>,
    pub mr: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

impl KernelReduction {
    pub fn new(m: &DMatrix<f64>, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Self {
        let z = kernel_basis(b);
        let mr = z.transpose() * m * &z;
        let ar = z.transpose() * a * &z;
        let r = -mr.clone().lu().solve(&ar).expect("reduced mass is SPD");
        KernelReduction { z, mr, r }
    }

    /// `e^{Xt} x0` for `x0 ∈ ker B`.
    pub fn flow(&self, x0: &[f64], t: f64) -> Vec<f64> {
        let y0 = self.z.transpose() * DVector::from_column_slice(x0);
        let y = (&self.r * t).exp() * y0;
        (&self.z * y).as_slice().to_vec()
    }

    /// Solution at `t` of the reduced problem with forcing `Z^T (c0 + c1 s)`
    /// (load vectors), starting from `x0 ∈ ker B`, via one augmented exponential.
    pub fn forced_linear(&self, x0: &[f64], c0: &[f64], c1: &[f64], t: f64) -> Vec<f64> {
        let k = self.z.ncols();
        let solve = |v: &[f64]| {
            let rhs = self.z.transpose() * DVector::from_column_slice(v);
            self.mr.clone().lu().solve(&rhs).unwrap()
        };
        let (d0, d1) = (solve(c0), solve(c1));
        // [y; s1; s0]' = [[R, d1, d0], [0, 0, 1], [0, 0, 0]] [y; s1; s0] with s1(0)=0, s0 ≡ 1.
        let mut big = DMatrix::zeros(k + 2, k + 2);
        big.view_mut((0, 0), (k, k)).copy_from(&self.r);
        big.view_mut((0, k), (k, 1)).copy_from(&d1);
        big.view_mut((0, k + 1), (k, 1)).copy_from(&d0);
        big[(k, k + 1)] = 1.0;
        let mut v0 = DVector::zeros(k + 2);
        v0.rows_mut(0, k)
            .copy_from(&(self.z.transpose() * DVector::from_column_slice(x0)));
        v0[k + 1] = 1.0;
        let v = (big * t).exp() * v0;
        (&self.z * v.rows(0, k)).as_slice().to_vec()
    }
}

/// Dense solve of `[S B^T; B 0] [x; ν] = [f; g]`.
pub fn dense_saddle(s: &DMatrix<f64>, b: &DMatrix<f64>, f: &[f64], g: &[f64]) -> Vec<f64> {
    let (n, m) = (s.nrows(), b.nrows());
    let mut k = DMatrix::zeros(n + m, n + m);
    k.view_mut((0, 0), (n, n)).copy_from(s);
    k.view_mut((0, n), (n, m)).copy_from(&b.transpose());
    k.view_mut((n, 0), (m, n)).copy_from(b);
    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from_slice(f);
    rhs.rows_mut(n, m).copy_from_slice(g);
    let sol = k.lu().solve(&rhs).expect("nonsingular saddle matrix");
    sol.rows(0, n).as_slice().to_vec()
}

/// Random `(M, A, B)` with `M` SPD, `A` elliptic and optionally non-symmetric, `B` full rank.
pub struct RandomSystem {
    pub m: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl RandomSystem {
    pub fn new(rng: &mut ChaCha8Rng, n: usize, m: usize, symmetric: bool) -> Self {
        let mut u = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0));
        let p = u(n, n);
        let mass = DMatrix::identity(n, n) + &p * p.transpose() / (2.0 * n as f64);
        let g = u(n, n);
        let mut a = DMatrix::identity(n, n) + &g * g.transpose() * (10.0 / n as f64);
        if !symmetric {
            let h = u(n, n);
            a += (&h - h.transpose()) * (1.0 / (n as f64).sqrt());
        }
        let b = u(m, n);
        RandomSystem { m: mass, a, b }
    }

    pub fn seeded(seed: u64, n: usize, m: usize, symmetric: bool) -> Self {
        Self::new(&mut ChaCha8Rng::seed_from_u64(seed), n, m, symmetric)
    }

    pub fn sparse(&self) -> (SparseMatrix, SparseMatrix, SparseMatrix) {
        (
            SparseMatrix::from_dense(&self.m),
            SparseMatrix::from_dense(&self.a),
            SparseMatrix::from_dense(&self.b),
        )
    }

    pub fn reduction(&self) -> KernelReduction {
        KernelReduction::new(&self.m, &self.a, &self.b)
    }

    /// A random vector projected onto `ker B` (Euclidean projection, dense).
    pub fn kernel_vector(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let z = kernel_basis(&self.b);
        let v = DVector::from_fn(self.m.nrows(), |_, _| rng.random_range(-1.0..1.0));
        (&z * (z.transpose() * v)).as_slice().to_vec()
    }
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let n: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    d / n
}
