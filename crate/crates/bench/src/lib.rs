// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the benchmarks.

use expint_dae::integrators::StepState;
use expint_dae::linalg::DenseVector;
use expint_dae::problems::{build_dynbc, build_nonsym, DynBcConfig, NonSymConfig, Problem};

/// dynbc on a mesh with `1/h = n`.
pub fn dynbc(n: usize) -> Problem {
    build_dynbc(&DynBcConfig::with_mesh(n)).expect("valid dynbc mesh")
}

/// nonsym on a mesh with `1/h = n`.
pub fn nonsym(n: usize) -> Problem {
    build_nonsym(&NonSymConfig {
        n,
        ..NonSymConfig::default()
    })
    .expect("valid nonsym mesh")
}

/// Initial state of `p`.
pub fn initial_state(p: &Problem) -> StepState {
    StepState::new(&p.system, p.t0, p.u0.clone()).expect("consistent initial value")
}

/// Deterministic vector in `ker B`.
pub fn kernel_vector(p: &Problem) -> DenseVector {
    let v: Vec<f64> = (0..p.system.n())
        .map(|i| ((i * 7919) % 1013) as f64 / 1013.0 - 0.5)
        .collect();
    p.system.dae_operator().project(&v).expect("projection")
}
