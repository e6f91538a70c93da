// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("saddle-point matrix is singular (pivot {pivot:.3e} at row {row}, threshold {threshold:.3e})")]
    SingularSaddle {
        row: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("phi-function order {0} exceeds the supported maximum of {max}", max = crate::expm::MAX_PHI_ORDER)]
    OrderTooHigh(usize),

    #[error("recursion path for phi-functions requires an invertible argument")]
    SingularZ,

    #[error("Arnoldi process requires a nonzero initial vector")]
    ZeroInitialVector,

    #[error("state violates the homogeneous constraint: |Bx| = {residual:.3e}, |x| = {norm:.3e}")]
    InconsistentState { residual: f64, norm: f64 },

    #[error("Krylov flow did not converge within {substeps} substeps (estimate {estimate:.3e}, tol {tol:.3e})")]
    NoConvergence {
        substeps: usize,
        estimate: f64,
        tol: f64,
    },

    #[error("initial data is inconsistent: |B u0 - g(t0)| = {residual:.3e}")]
    InconsistentInitialData { residual: f64 },

    #[error("negative energy e^T A_sym e = {0:.3e}; symmetric part of A is not elliptic")]
    NegativeEnergy(f64),

    #[error("norm `{0}` is not available for this problem")]
    NormUnavailable(&'static str),

    #[error("reference self-check failed: refinement changes the reference by {difference:.3e}, allowed {allowed:.3e}")]
    SelfCheckFailed { difference: f64, allowed: f64 },

    #[error("no reference solution available: {0}")]
    MissingReference(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error in {path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSaddle { .. }
                | Error::NotPositiveDefinite(_)
                | Error::NonFinite(_)
                | Error::SingularZ
                | Error::ZeroInitialVector
                | Error::InconsistentState { .. }
                | Error::NoConvergence { .. }
                | Error::NegativeEnergy(_)
                | Error::SelfCheckFailed { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
