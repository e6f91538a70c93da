// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

//! Compressed sparse row storage.

use nalgebra::DMatrix;

use crate::error::{check_dim, Result};
use crate::linalg::DenseVector;

/// Real matrix in compressed sparse row form.
///
/// Column indices are strictly increasing within each row and no explicit
/// zeros are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed
    /// and entries that end up exactly zero are dropped.
    ///
    /// Panics if an index is out of range.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, j, _) in triplets {
            assert!(
                i < nrows && j < ncols,
                "triplet ({i}, {j}) outside {nrows}x{ncols}"
            );
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        let mut next = counts.clone();
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }

        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..nrows {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < scratch.len() {
                let j = scratch[k].0;
                let mut sum = 0.0;
                while k < scratch.len() && scratch[k].0 == j {
                    sum += scratch[k].1;
                    k += 1;
                }
                if sum != 0.0 {
                    col_indices.push(j);
                    values.push(sum);
                }
            }
            row_offsets.push(col_indices.len());
        }
        SparseMatrix {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(d: &DMatrix<f64>) -> Self {
        let mut t = Vec::new();
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                if d[(i, j)] != 0.0 {
                    t.push((i, j, d[(i, j)]));
                }
            }
        }
        Self::from_triplets(d.nrows(), d.ncols(), &t)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            d[(i, j)] = v;
        }
        d
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &self.values[r])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        c.binary_search(&j).map(|k| v[k]).unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `y = self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<DenseVector> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dim("spmv input", self.ncols, x.len())?;
        check_dim("spmv output", self.nrows, y.len())?;
        for (i, yi) in y.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            *yi = c.iter().zip(v).map(|(&j, a)| a * x[j]).sum();
        }
        Ok(())
    }

    /// `y = self^T * x`.
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Result<DenseVector> {
        check_dim("spmv^T input", self.nrows, x.len())?;
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            let (c, v) = self.row(i);
            for (&j, a) in c.iter().zip(v) {
                y[j] += a * xi;
            }
        }
        Ok(y)
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let t: Vec<_> = self.iter().map(|(i, j, v)| (i, j, alpha * v)).collect();
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    /// `alpha * self + beta * other`.
    pub fn lin_comb(&self, alpha: f64, other: &SparseMatrix, beta: f64) -> Result<Self> {
        check_dim("lin_comb rows", self.nrows, other.nrows)?;
        check_dim("lin_comb cols", self.ncols, other.ncols)?;
        let t: Vec<_> = self
            .iter()
            .map(|(i, j, v)| (i, j, alpha * v))
            .chain(other.iter().map(|(i, j, v)| (i, j, beta * v)))
            .collect();
        Ok(Self::from_triplets(self.nrows, self.ncols, &t))
    }

    /// Block-diagonal concatenation.
    pub fn block_diag(blocks: &[&SparseMatrix]) -> Self {
        let nrows = blocks.iter().map(|b| b.nrows).sum();
        let ncols = blocks.iter().map(|b| b.ncols).sum();
        let mut t = Vec::new();
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            t.extend(b.iter().map(|(i, j, v)| (i + r0, j + c0, v)));
            r0 += b.nrows;
            c0 += b.ncols;
        }
        Self::from_triplets(nrows, ncols, &t)
    }

    /// Assembles a block matrix from a row-major grid of optional blocks.
    /// Row heights and column widths are taken from `row_dims`/`col_dims`.
    pub fn from_blocks(
        row_dims: &[usize],
        col_dims: &[usize],
        blocks: &[&[Option<&SparseMatrix>]],
    ) -> Result<Self> {
        let mut t = Vec::new();
        let mut r0 = 0;
        for (bi, row) in blocks.iter().enumerate() {
            let mut c0 = 0;
            for (bj, blk) in row.iter().enumerate() {
                if let Some(b) = blk {
                    check_dim("block rows", row_dims[bi], b.nrows)?;
                    check_dim("block cols", col_dims[bj], b.ncols)?;
                    t.extend(b.iter().map(|(i, j, v)| (i + r0, j + c0, v)));
                }
                c0 += col_dims[bj];
            }
            r0 += row_dims[bi];
        }
        Ok(Self::from_triplets(
            row_dims.iter().sum(),
            col_dims.iter().sum(),
            &t,
        ))
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let t = self.transpose();
        self.lin_comb(1.0, &t, -1.0)
            .map(|d| d.max_abs() / scale)
            .unwrap_or(f64::INFINITY)
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.asymmetry() <= rel_tol
    }

    /// Symmetric part `(A + A^T)/2`.
    pub fn symmetric_part(&self) -> Self {
        let t = self.transpose();
        self.lin_comb(0.5, &t, 0.5)
            .expect("square matrix has a transpose of equal shape")
    }

    /// Quadratic form `x^T A x`.
    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        let ax = self.mul_vec(x)?;
        Ok(crate::linalg::dot(x, &ax))
    }
}

/// Sparse matrix-vector product.
pub fn spmv(mtx: &SparseMatrix, v: &[f64]) -> Result<DenseVector> {
    mtx.mul_vec(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_invariants(a: &SparseMatrix) {
        assert_eq!(a.row_offsets.len(), a.nrows + 1);
        assert_eq!(*a.row_offsets.last().unwrap(), a.values.len());
        for i in 0..a.nrows {
            assert!(a.row_offsets[i] <= a.row_offsets[i + 1]);
            let (c, v) = a.row(i);
            assert!(c.windows(2).all(|w| w[0] < w[1]));
            assert!(v.iter().all(|&x| x != 0.0));
        }
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let a = SparseMatrix::from_triplets(
            2,
            3,
            &[
                (1, 2, 1.0),
                (0, 1, 2.0),
                (1, 0, 3.0),
                (1, 2, -1.0),
                (0, 1, 0.5),
            ],
        );
        check_invariants(&a);
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 1), 2.5);
        assert_eq!(a.get(1, 2), 0.0);
    }

    #[test]
    fn spmv_examples() {
        let v = vec![1.5, -2.0, 3.0];
        assert_eq!(spmv(&SparseMatrix::identity(3), &v).unwrap(), v);
        assert_eq!(spmv(&SparseMatrix::zeros(3, 3), &v).unwrap(), vec![0.0; 3]);
        let a = SparseMatrix::from_triplets(
            2,
            2,
            &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 3.0), (1, 1, 4.0)],
        );
        assert_eq!(spmv(&a, &[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
    }

    #[test]
    fn spmv_dimension_mismatch() {
        let a = SparseMatrix::identity(3);
        assert!(matches!(
            spmv(&a, &[1.0, 2.0]),
            Err(crate::Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn transpose_product_matches() {
        let a = SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, -1.0)]);
        let x = [1.0, 2.0];
        assert_eq!(
            a.mul_transpose_vec(&x).unwrap(),
            a.transpose().mul_vec(&x).unwrap()
        );
        check_invariants(&a.transpose());
    }

    #[test]
    fn blocks_and_symmetry() {
        let a = SparseMatrix::identity(2);
        let b = SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0)]);
        let bt = b.transpose();
        let k = SparseMatrix::from_blocks(
            &[2, 1],
            &[2, 1],
            &[&[Some(&a), Some(&bt)], &[Some(&b), None]],
        )
        .unwrap();
        check_invariants(&k);
        assert!(k.is_symmetric(0.0));
        assert_eq!(k.get(2, 0), 1.0);
        assert_eq!(k.get(0, 2), 1.0);
        let nonsym = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0)]);
        assert!(!nonsym.is_symmetric(1e-12));
        assert!(nonsym.symmetric_part().is_symmetric(0.0));
    }
}
