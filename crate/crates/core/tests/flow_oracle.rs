// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use common::{rel_diff, RandomSystem};
use expint_dae::flow::{arnoldi, flow, DaeOperator, FlowOptions};
use expint_dae::linalg::norm2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check(seed: u64, n: usize, m: usize, symmetric: bool, t: f64) {
    let sys = RandomSystem::seeded(seed, n, m, symmetric);
    let (ms, a, b) = sys.sparse();
    let op = DaeOperator::new(&ms, &a, &b).unwrap();
    let x0 = sys.kernel_vector(&mut ChaCha8Rng::seed_from_u64(seed + 1000));
    let opts = FlowOptions {
        diagnostics: true,
        ..FlowOptions::default()
    };
    let got = flow(&op, &x0, t, &opts).unwrap();
    let want = sys.reduction().flow(&x0, t);
    assert!(
        rel_diff(&got.x_t, &want) <= 1e-8,
        "seed {seed}: {}",
        rel_diff(&got.x_t, &want)
    );
    assert!(op.constraint_residual(&got.x_t).unwrap() <= 1e-10 * norm2(&got.x_t));
    let d = got.diagnostics.unwrap();
    assert!(
        d.orthonormality <= 1e-10 && d.relation_residual <= 1e-9,
        "{d:?}"
    );
}

#[test]
fn matches_kernel_reduction_symmetric() {
    check(1, 30, 2, true, 1.0);
    check(2, 80, 5, true, 0.3);
}

#[test]
fn matches_kernel_reduction_nonsymmetric() {
    check(3, 40, 3, false, 1.0);
    check(4, 100, 1, false, 2.0);
}

#[test]
fn arnoldi_basis_lies_in_kernel() {
    let sys = RandomSystem::seeded(7, 50, 4, false);
    let (ms, a, b) = sys.sparse();
    let op = DaeOperator::new(&ms, &a, &b).unwrap();
    let x0 = sys.kernel_vector(&mut ChaCha8Rng::seed_from_u64(8));
    let dec = arnoldi(&op, &x0, 20).unwrap();
    for v in &dec.basis {
        let bv = b.mul_vec(v).unwrap();
        assert!(norm2(&bv) <= 1e-10);
    }
    assert!(dec.diagnostics.orthonormality <= 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn random_systems(seed in 0u64..10_000, n in 8usize..60, m in 1usize..5, sym in any::<bool>()) {
        check(seed, n, m, sym, 1.0);
    }
}
