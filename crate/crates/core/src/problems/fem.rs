// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

//! Linear (P1) and bilinear (Q1) finite element matrices on uniform meshes.

use crate::linalg::SparseMatrix;

/// 1D element stiffness and mass on an interval of length `h`.
fn element_1d(h: f64) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let k = [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
    let m = [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]];
    (k, m)
}

/// P1 stiffness and mass on `[0, 1]` with `n` cells. `dof(i)` maps node `i`
/// (0..=n) to an unknown index or `None` for an eliminated Dirichlet node.
pub fn p1_matrices(
    n: usize,
    dof: impl Fn(usize) -> Option<usize>,
    ndof: usize,
) -> (SparseMatrix, SparseMatrix) {
    let h = 1.0 / n as f64;
    let (ke, me) = element_1d(h);
    let mut kt = Vec::with_capacity(4 * n);
    let mut mt = Vec::with_capacity(4 * n);
    for e in 0..n {
        let nodes = [e, e + 1];
        for a in 0..2 {
            let Some(ia) = dof(nodes[a]) else { continue };
            for b in 0..2 {
                let Some(ib) = dof(nodes[b]) else { continue };
                kt.push((ia, ib, ke[a][b]));
                mt.push((ia, ib, me[a][b]));
            }
        }
    }
    (
        SparseMatrix::from_triplets(ndof, ndof, &kt),
        SparseMatrix::from_triplets(ndof, ndof, &mt),
    )
}

/// Q1 stiffness and mass on `(0,1)^2` with an `n × n` grid; node `(i, j)` sits at `(i h, j h)`.
pub fn q1_matrices(
    n: usize,
    dof: impl Fn(usize, usize) -> Option<usize>,
    ndof: usize,
) -> (SparseMatrix, SparseMatrix) {
    let h = 1.0 / n as f64;
    let (k1, m1) = element_1d(h);
    let local = [(0usize, 0usize), (1, 0), (0, 1), (1, 1)];
    let mut kt = Vec::with_capacity(16 * n * n);
    let mut mt = Vec::with_capacity(16 * n * n);
    for ey in 0..n {
        for ex in 0..n {
            for &(ax, ay) in &local {
                let Some(ia) = dof(ex + ax, ey + ay) else {
                    continue;
                };
                for &(bx, by) in &local {
                    let Some(ib) = dof(ex + bx, ey + by) else {
                        continue;
                    };
                    let k = k1[ax][bx] * m1[ay][by] + m1[ax][bx] * k1[ay][by];
                    kt.push((ia, ib, k));
                    mt.push((ia, ib, m1[ax][bx] * m1[ay][by]));
                }
            }
        }
    }
    (
        SparseMatrix::from_triplets(ndof, ndof, &kt),
        SparseMatrix::from_triplets(ndof, ndof, &mt),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    #[test]
    fn p1_reproduces_integrals() {
        let n = 16;
        let (k, m) = p1_matrices(n, Some, n + 1);
        let ones = vec![1.0; n + 1];
        // ∫ 1 = 1 and the stiffness annihilates constants.
        assert!((m.quad_form(&ones).unwrap() - 1.0).abs() < 1e-14);
        assert!(k.mul_vec(&ones).unwrap().iter().all(|v| v.abs() < 1e-12));
        // Linear x: ∫ x^2 = 1/3 exactly, ∫ (x')^2 = 1.
        let x: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        assert!((m.quad_form(&x).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((k.quad_form(&x).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn q1_reproduces_integrals() {
        let n = 8;
        let nn = n + 1;
        let (k, m) = q1_matrices(n, |i, j| Some(j * nn + i), nn * nn);
        let ones = vec![1.0; nn * nn];
        assert!((m.quad_form(&ones).unwrap() - 1.0).abs() < 1e-13);
        // u = x + 2y: ∫|∇u|^2 = 5 exactly for bilinear elements.
        let u: Vec<f64> = (0..nn * nn)
            .map(|p| ((p % nn) as f64 + 2.0 * (p / nn) as f64) / n as f64)
            .collect();
        assert!((k.quad_form(&u).unwrap() - 5.0).abs() < 1e-12);
        assert!(dot(&k.mul_vec(&ones).unwrap(), &ones).abs() < 1e-12);
        assert!(k.is_symmetric(1e-14) && m.is_symmetric(1e-14));
    }
}
