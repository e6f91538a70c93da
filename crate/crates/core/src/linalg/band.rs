// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

//! Banded Gaussian elimination with partial pivoting, applied after a
//! bandwidth-reducing symmetric permutation.

use crate::error::{Error, Result};
use crate::linalg::{ordering, SparseMatrix};

/// Relative pivot threshold: pivots below `PIVOT_RTOL * max|a_ij|` are singular.
pub const PIVOT_RTOL: f64 = 1e-13;

/// LU factors of `P A P^T` in LAPACK general-band layout.
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    /// Upper bandwidth of U including pivoting fill (`kl + ku`).
    kv: usize,
    ldab: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
    perm: Vec<usize>,
}

impl BandLu {
    /// Factors a square sparse matrix after a reverse Cuthill-McKee reordering.
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        assert_eq!(a.nrows(), a.ncols(), "band LU needs a square matrix");
        let perm = ordering::reverse_cuthill_mckee(a);
        Self::factor_with_permutation(a, perm)
    }

    pub fn factor_with_permutation(a: &SparseMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.nrows();
        let (kl, ku) = ordering::bandwidths(a, &perm);
        let kv = kl + ku;
        let ldab = 2 * kl + ku + 1;
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut ab = vec![0.0; ldab * n];
        for (i, j, v) in a.iter() {
            let (pi, pj) = (inv[i], inv[j]);
            ab[pj * ldab + kv + pi - pj] = v;
        }
        let threshold = PIVOT_RTOL * a.max_abs();
        let mut lu = BandLu {
            n,
            kl,
            kv,
            ldab,
            ab,
            ipiv: vec![0; n],
            perm,
        };
        lu.eliminate(threshold)?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ldab + self.kv + i - j
    }

    fn eliminate(&mut self, threshold: f64) -> Result<()> {
        let n = self.n;
        let (kl, kv) = (self.kl, self.kv);
        let ku = kv - kl;
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = self.ab[self.idx(j, j)].abs();
            for r in 1..=km {
                let v = self.ab[self.idx(j + r, j)].abs();
                if v > best {
                    best = v;
                    jp = r;
                }
            }
            if !(best > threshold) {
                return Err(Error::SingularSaddle {
                    row: self.perm[j],
                    pivot: best,
                    threshold,
                });
            }
            self.ipiv[j] = j + jp;
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let (a, b) = (self.idx(j, c), self.idx(j + jp, c));
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.idx(j, j)];
            let col0 = self.idx(j + 1, j);
            for v in &mut self.ab[col0..col0 + km] {
                *v /= pivot;
            }
            for c in j + 1..=ju {
                let ujc = self.ab[self.idx(j, c)];
                if ujc == 0.0 {
                    continue;
                }
                let dst0 = self.idx(j + 1, c);
                for r in 0..km {
                    let l = self.ab[col0 + r];
                    self.ab[dst0 + r] -= l * ujc;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Lower bandwidth and upper bandwidth of the factored (permuted) matrix.
    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.kv - self.kl)
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                y.swap(j, p);
            }
            let yj = y[j];
            if yj != 0.0 {
                let km = self.kl.min(n - 1 - j);
                let col0 = self.idx(j + 1, j);
                for r in 0..km {
                    y[j + 1 + r] -= self.ab[col0 + r] * yj;
                }
            }
        }
        for j in (0..n).rev() {
            y[j] /= self.ab[self.idx(j, j)];
            let yj = y[j];
            if yj != 0.0 {
                let i0 = j.saturating_sub(self.kv);
                let base = self.idx(i0, j);
                for (k, i) in (i0..j).enumerate() {
                    y[i] -= self.ab[base + k] * yj;
                }
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = y[new];
        }
    }
}

/// Verifies that `a` is symmetric positive definite by a banded Cholesky factorization.
pub fn check_spd(a: &SparseMatrix) -> Result<()> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::NotPositiveDefinite("matrix is not square".into()));
    }
    if !a.is_symmetric(1e-12) {
        return Err(Error::NotPositiveDefinite("matrix is not symmetric".into()));
    }
    let perm = ordering::reverse_cuthill_mckee(a);
    let (kl, _) = ordering::bandwidths(a, &perm);
    let mut inv = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    // Row-major lower band: l[i * (kl+1) + (j + kl - i)] for i - kl <= j <= i.
    let w = kl + 1;
    let mut l = vec![0.0; n * w];
    for (i, j, v) in a.iter() {
        let (pi, pj) = (inv[i], inv[j]);
        if pj <= pi {
            l[pi * w + pj + kl - pi] = v;
        }
    }
    let scale = a.max_abs();
    for i in 0..n {
        let j0 = i.saturating_sub(kl);
        for j in j0..=i {
            let mut s = l[i * w + j + kl - i];
            let k0 = j0.max(j.saturating_sub(kl));
            for k in k0..j {
                s -= l[i * w + k + kl - i] * l[j * w + k + kl - j];
            }
            if j == i {
                if !(s > PIVOT_RTOL * scale) {
                    return Err(Error::NotPositiveDefinite(format!(
                        "nonpositive pivot {s:.3e} at row {}",
                        perm[i]
                    )));
                }
                l[i * w + kl] = s.sqrt();
            } else {
                l[i * w + j + kl - i] = s / l[j * w + kl];
            }
        }
    }
    Ok(())
}
