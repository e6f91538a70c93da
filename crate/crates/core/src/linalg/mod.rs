// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

//! Sparse and dense real linear algebra: CSR matrices, saddle-point
//! factorizations and kernel projections.

pub mod band;
pub mod mtx;
pub mod ordering;
mod saddle;
mod sparse;
mod vector;

pub use band::check_spd;
pub use saddle::{
    assemble_saddle, kernel_project, saddle_solve, SaddleFactorization, SaddleSolution,
};
pub use sparse::{spmv, SparseMatrix};
pub use vector::*;
