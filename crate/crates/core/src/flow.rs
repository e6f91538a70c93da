// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

//! Krylov evaluation of the flow of the homogeneous index-2 DAE
//!
//! ```text
//! M x' + A x + B^T λ = 0,   B x = 0,   x(0) = x0,
//! ```
//!
//! whose solution is `x(t) = e^{Xt} x0` for a matrix `X` that is never formed.
//! `X x0` is the solution `y` of the saddle problem
//! `M y + B^T μ = -A x0`, `B y = 0`, so Arnoldi can build `V_r`, `H_r` from
//! saddle solves alone and `e^{Xt} x0 ≈ |x0| V_r e^{t H_r} e_1`.

use crate::error::{check_dim, Error, Result};
use crate::expm::{expm, DenseMatrix};
use crate::linalg::{
    dot, kernel_project, norm2, DenseVector, SaddleFactorization, SaddleSolution, SparseMatrix,
};

/// Action of `X` through the factorization of `[M B^T; B 0]`.
#[derive(Clone, Debug)]
pub struct DaeOperator {
    mass_saddle: SaddleFactorization,
    a: SparseMatrix,
}

impl DaeOperator {
    pub fn new(m: &SparseMatrix, a: &SparseMatrix, b: &SparseMatrix) -> Result<Self> {
        Self::from_factorization(SaddleFactorization::new(m, b)?, a.clone())
    }

    pub fn from_factorization(mass_saddle: SaddleFactorization, a: SparseMatrix) -> Result<Self> {
        check_dim("DaeOperator: A rows", mass_saddle.primal_dim(), a.nrows())?;
        check_dim("DaeOperator: A cols", mass_saddle.primal_dim(), a.ncols())?;
        Ok(DaeOperator { mass_saddle, a })
    }

    pub fn dim(&self) -> usize {
        self.mass_saddle.primal_dim()
    }

    pub fn constraint_dim(&self) -> usize {
        self.mass_saddle.constraint_dim()
    }

    pub fn mass_saddle(&self) -> &SaddleFactorization {
        &self.mass_saddle
    }

    pub fn stiffness(&self) -> &SparseMatrix {
        &self.a
    }

    /// `y = X x0` together with the multiplier `μ`.
    pub fn apply_with_multiplier(&self, x0: &[f64]) -> Result<SaddleSolution> {
        check_dim("apply_X", self.dim(), x0.len())?;
        let mut rhs = self.a.mul_vec(x0)?;
        rhs.iter_mut().for_each(|v| *v = -*v);
        self.mass_saddle
            .solve(&rhs, &vec![0.0; self.constraint_dim()])
    }

    /// `y = X x0`; `B y = 0` up to round-off.
    pub fn apply(&self, x0: &[f64]) -> Result<DenseVector> {
        Ok(self.apply_with_multiplier(x0)?.x)
    }

    /// `M`-orthogonal projection onto `ker B`.
    pub fn project(&self, x: &[f64]) -> Result<DenseVector> {
        kernel_project(&self.mass_saddle, x)
    }

    /// `|B x|`.
    pub fn constraint_residual(&self, x: &[f64]) -> Result<f64> {
        Ok(norm2(&self.mass_saddle.constraint_block().mul_vec(x)?))
    }
}

/// `y = X x0`.
pub fn apply_x(op: &DaeOperator, x0: &[f64]) -> Result<DenseVector> {
    op.apply(x0)
}

/// Relative size of `h_{j+1,j}` below which the Krylov space is invariant.
const BREAKDOWN_RTOL: f64 = 1e-14;

/// Incremental Arnoldi process with Euclidean inner product and classical
/// Gram-Schmidt applied twice.
///
/// An `M`-weighted inner product would only change `dot`/`norm2` here; the
/// Euclidean one is used throughout.
struct ArnoldiProcess<'a> {
    op: &'a DaeOperator,
    beta: f64,
    basis: Vec<DenseVector>,
    /// Column-major Hessenberg entries: `h[j]` holds `h_{0..=j+1, j}`.
    h: Vec<Vec<f64>>,
    images: Option<Vec<DenseVector>>,
    breakdown: bool,
}

impl<'a> ArnoldiProcess<'a> {
    fn new(op: &'a DaeOperator, x0: &[f64], keep_images: bool) -> Result<Self> {
        check_dim("arnoldi", op.dim(), x0.len())?;
        let beta = norm2(x0);
        if beta == 0.0 {
            return Err(Error::ZeroInitialVector);
        }
        let v1: DenseVector = x0.iter().map(|v| v / beta).collect();
        Ok(ArnoldiProcess {
            op,
            beta,
            basis: vec![v1],
            h: Vec::new(),
            images: keep_images.then(Vec::new),
            breakdown: false,
        })
    }

    fn size(&self) -> usize {
        self.h.len()
    }

    fn h_norm(&self) -> f64 {
        self.h.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn step(&mut self) -> Result<()> {
        let j = self.h.len();
        let mut w = self.op.apply(&self.basis[j])?;
        if let Some(imgs) = self.images.as_mut() {
            imgs.push(w.clone());
        }
        let mut col = vec![0.0; j + 2];
        for _pass in 0..2 {
            let coeffs: Vec<f64> = self.basis.iter().map(|v| dot(v, &w)).collect();
            for (c, v) in coeffs.iter().zip(&self.basis) {
                crate::linalg::axpy(-c, v, &mut w);
            }
            for (i, c) in coeffs.iter().enumerate() {
                col[i] += c;
            }
        }
        let hn = norm2(&w);
        col[j + 1] = hn;
        self.h.push(col);
        let scale = self.h_norm().max(f64::MIN_POSITIVE);
        if hn <= BREAKDOWN_RTOL * scale {
            self.breakdown = true;
            self.h.last_mut().unwrap()[j + 1] = 0.0;
        } else {
            w.iter_mut().for_each(|v| *v /= hn);
            self.basis.push(w);
        }
        Ok(())
    }

    fn hessenberg(&self) -> DenseMatrix {
        let r = self.size();
        DenseMatrix::from_fn(r, r, |i, j| if i <= j + 1 { self.h[j][i] } else { 0.0 })
    }

    fn h_next(&self) -> f64 {
        self.h.last().map(|c| c[c.len() - 1]).unwrap_or(0.0)
    }

    /// Error estimate and `e^{tH} e_1`.
    ///
    /// The estimate is `|x0| |h_next| max(|(e^{tH})_{r,1}|, t |(φ1(tH))_{r,1}|)`.
    /// The first term alone underflows for stiff `H` at small `r` and then
    /// accepts a basis that has not resolved the slow modes; the second is the
    /// integral form of the same residual. Both come from one exponential of
    /// `[[tH, e_1], [0, 0]]`.
    fn estimate(&self, t: f64) -> Result<(f64, Vec<f64>)> {
        let r = self.size();
        let mut aug = DenseMatrix::zeros(r + 1, r + 1);
        aug.view_mut((0, 0), (r, r))
            .copy_from(&(self.hessenberg() * t));
        aug[(0, r)] = 1.0;
        let e = expm(&aug)?;
        let first_col: Vec<f64> = e.view((0, 0), (r, 1)).iter().copied().collect();
        let est = if self.breakdown {
            0.0
        } else {
            let tail = first_col[r - 1].abs().max(t * e[(r - 1, r)].abs());
            self.beta * self.h_next().abs() * tail
        };
        Ok((est, first_col))
    }

    fn combine(&self, coeffs: &[f64]) -> DenseVector {
        let n = self.basis[0].len();
        let mut out = vec![0.0; n];
        for (c, v) in coeffs.iter().zip(&self.basis) {
            crate::linalg::axpy(self.beta * c, v, &mut out);
        }
        out
    }

    fn diagnostics(&self) -> Option<ArnoldiDiagnostics> {
        let images = self.images.as_ref()?;
        let r = self.size();
        let vs = &self.basis[..r];
        let mut ortho = 0.0_f64;
        for (i, vi) in vs.iter().enumerate() {
            for (j, vj) in vs.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                ortho = ortho.max((dot(vi, vj) - target).abs());
            }
        }
        // X V_r - V_{r+1} H_{r+1,r}, column by column
        let mut rel = 0.0_f64;
        for (j, img) in images.iter().enumerate() {
            let mut res = img.clone();
            for (i, hij) in self.h[j].iter().enumerate() {
                if i < self.basis.len() {
                    crate::linalg::axpy(-hij, &self.basis[i], &mut res);
                }
            }
            let denom = norm2(img)
                .max(self.h_norm() * f64::EPSILON)
                .max(f64::MIN_POSITIVE);
            rel = rel.max(norm2(&res) / denom);
        }
        Some(ArnoldiDiagnostics {
            orthonormality: ortho,
            relation_residual: rel,
        })
    }
}

/// Outcome of a plain Arnoldi run.
#[derive(Clone, Debug)]
pub struct ArnoldiDecomposition {
    /// Columns `v_1..v_r`.
    pub basis: Vec<DenseVector>,
    /// `v_{r+1}` unless the process broke down.
    pub next_vector: Option<DenseVector>,
    pub hessenberg: DenseMatrix,
    pub h_next: f64,
    /// True if the Krylov space became invariant (the result is exact).
    pub exact: bool,
    pub diagnostics: ArnoldiDiagnostics,
}

/// Structural checks of an Arnoldi decomposition.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ArnoldiDiagnostics {
    /// `max |V^T V - I|`.
    pub orthonormality: f64,
    /// `max_j |X v_j - Σ_i h_ij v_i| / |X v_j|`.
    pub relation_residual: f64,
}

impl ArnoldiDiagnostics {
    fn merge(self, other: Self) -> Self {
        ArnoldiDiagnostics {
            orthonormality: self.orthonormality.max(other.orthonormality),
            relation_residual: self.relation_residual.max(other.relation_residual),
        }
    }
}

/// Runs at most `r_max` Arnoldi steps for `X` starting from `x0 / |x0|`.
pub fn arnoldi(op: &DaeOperator, x0: &[f64], r_max: usize) -> Result<ArnoldiDecomposition> {
    let mut p = ArnoldiProcess::new(op, x0, true)?;
    while p.size() < r_max.max(1) && !p.breakdown {
        p.step()?;
    }
    let diagnostics = p.diagnostics().unwrap_or_default();
    let r = p.size();
    let next_vector = (!p.breakdown).then(|| p.basis[r].clone());
    Ok(ArnoldiDecomposition {
        hessenberg: p.hessenberg(),
        h_next: p.h_next(),
        exact: p.breakdown,
        next_vector,
        basis: p.basis.into_iter().take(r).collect(),
        diagnostics,
    })
}

/// Tuning of [`flow`].
#[derive(Clone, Debug, PartialEq)]
pub struct FlowOptions {
    /// Error tolerance relative to `|x0|`.
    pub tol: f64,
    /// Krylov dimension cap per substep.
    pub r_max: usize,
    /// Maximum number of substeps produced by interval halving.
    pub max_substeps: usize,
    /// Required `|B x0| / |x0|` on entry.
    pub consistency_tol: f64,
    /// Recover the Lagrange multiplier at the output time.
    pub recover_multiplier: bool,
    /// Record orthonormality and Arnoldi-relation residuals.
    pub diagnostics: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            tol: 1e-10,
            r_max: 60,
            max_substeps: 30,
            consistency_tol: 1e-8,
            recover_multiplier: false,
            diagnostics: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KrylovFlowResult {
    pub x_t: DenseVector,
    /// Largest Krylov dimension used by any substep.
    pub basis_size: usize,
    /// Accumulated error estimate, relative to `|x0|`.
    pub residual_estimate: f64,
    pub substeps: usize,
    /// `|B x| / |x|` before the final projection.
    pub drift: f64,
    /// Multiplier `μ` at the output time, if requested.
    pub multiplier: Option<DenseVector>,
    pub diagnostics: Option<ArnoldiDiagnostics>,
}

struct FlowState {
    substeps: usize,
    basis_size: usize,
    estimate_abs: f64,
    diagnostics: Option<ArnoldiDiagnostics>,
}

/// Approximates `x(t) = e^{Xt} x0`.
pub fn flow(op: &DaeOperator, x0: &[f64], t: f64, opts: &FlowOptions) -> Result<KrylovFlowResult> {
    check_dim("flow", op.dim(), x0.len())?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "flow time must be finite and nonnegative, got {t}"
        )));
    }
    let beta = norm2(x0);
    let bx = op.constraint_residual(x0)?;
    if bx > opts.consistency_tol * beta {
        return Err(Error::InconsistentState {
            residual: bx,
            norm: beta,
        });
    }
    if t == 0.0 || beta == 0.0 {
        return Ok(KrylovFlowResult {
            x_t: x0.to_vec(),
            basis_size: 0,
            residual_estimate: 0.0,
            substeps: 0,
            drift: if beta == 0.0 { 0.0 } else { bx / beta },
            multiplier: opts
                .recover_multiplier
                .then(|| vec![0.0; op.constraint_dim()]),
            diagnostics: None,
        });
    }

    let mut state = FlowState {
        substeps: 0,
        basis_size: 0,
        estimate_abs: 0.0,
        diagnostics: None,
    };
    let budget = opts.tol * beta / t;
    let raw = advance(op, x0.to_vec(), t, budget, opts, &mut state)?;
    let nrm = norm2(&raw);
    let drift = if nrm > 0.0 {
        op.constraint_residual(&raw)? / nrm
    } else {
        0.0
    };
    let x_t = op.project(&raw)?;
    if !crate::linalg::all_finite(&x_t) {
        return Err(Error::NonFinite("flow"));
    }
    let multiplier = if opts.recover_multiplier {
        Some(op.apply_with_multiplier(&x_t)?.multiplier)
    } else {
        None
    };
    Ok(KrylovFlowResult {
        x_t,
        basis_size: state.basis_size,
        residual_estimate: state.estimate_abs / beta,
        substeps: state.substeps,
        drift,
        multiplier,
        diagnostics: state.diagnostics,
    })
}

/// Advances `x` by `t`; `budget` is the allowed absolute error per unit time.
/// On failure at `t`, reuses the basis for the leftmost dyadic piece
/// `t / 2^k` and advances the remaining halves recursively.
fn advance(
    op: &DaeOperator,
    x: DenseVector,
    t: f64,
    budget: f64,
    opts: &FlowOptions,
    state: &mut FlowState,
) -> Result<DenseVector> {
    if norm2(&x) == 0.0 {
        state.substeps += 1;
        return Ok(x);
    }
    let mut p = ArnoldiProcess::new(op, &x, opts.diagnostics)?;
    let mut last = (f64::INFINITY, Vec::new());
    while p.size() < opts.r_max && !p.breakdown {
        p.step()?;
        let r = p.size();
        if p.breakdown || r <= 8 || r % 4 == 0 || r == opts.r_max {
            last = p.estimate(t)?;
            if last.0 <= budget * t {
                break;
            }
        }
    }
    state.basis_size = state.basis_size.max(p.size());
    if let Some(d) = p.diagnostics() {
        state.diagnostics = Some(state.diagnostics.map_or(d, |s| s.merge(d)));
    }

    let (est, coeffs) = last;
    if est <= budget * t {
        state.substeps += 1;
        state.estimate_abs += est;
        check_substeps(state, opts, est, budget * t)?;
        return Ok(p.combine(&coeffs));
    }

    // Largest dyadic fraction of `t` that this basis resolves.
    let mut k = 1;
    let mut dt = t / 2.0;
    let mut piece = p.estimate(dt)?;
    while piece.0 > budget * dt {
        k += 1;
        dt /= 2.0;
        if (1usize << k) > opts.max_substeps {
            return Err(Error::NoConvergence {
                substeps: state.substeps + (1 << k),
                estimate: piece.0,
                tol: budget * dt,
            });
        }
        piece = p.estimate(dt)?;
    }
    state.substeps += 1;
    state.estimate_abs += piece.0;
    check_substeps(state, opts, piece.0, budget * dt)?;
    let mut y = p.combine(&piece.1);
    drop(p);
    for j in (1..=k).rev() {
        y = advance(op, y, t / f64::from(1u32 << j), budget, opts, state)?;
    }
    Ok(y)
}

fn check_substeps(state: &FlowState, opts: &FlowOptions, estimate: f64, tol: f64) -> Result<()> {
    if state.substeps > opts.max_substeps {
        Err(Error::NoConvergence {
            substeps: state.substeps,
            estimate,
            tol,
        })
    } else {
        Ok(())
    }
}
