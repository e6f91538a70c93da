// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

//! Exponential integrators for constrained parabolic systems.

mod schemes;
mod system;
mod trajectory;

pub use schemes::{
    alt_euler_step, euler_step, family_step, second_order_step, FlowStats, Scheme, SchemeConfig,
    StepState, Stepper,
};
pub use system::{b_minus, w_solve, ConstrainedSystem, ConstraintFn, LoadFn};
pub use trajectory::{
    integrate, read_states_binary, step_count, write_states_binary, write_trajectory_csv,
    write_trajectory_csv_to, Record, StepRecord, Trajectory,
};

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::expm::{polyrhs_solution, DenseMatrix};
    use crate::flow::FlowOptions;
    use crate::linalg::{norm2, sub, SparseMatrix};

    fn tridiag(n: usize, d: f64, o: f64) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, d));
            if i + 1 < n {
                t.push((i, i + 1, o));
                t.push((i + 1, i, o));
            }
        }
        SparseMatrix::from_triplets(n, n, &t)
    }

    /// Unconstrained `u' + A u = f0 + f1 t`.
    fn linear_forcing(n: usize) -> (ConstrainedSystem, Vec<f64>, Vec<f64>) {
        let f0: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let f1: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let (a0, a1) = (f0.clone(), f1.clone());
        let sys = ConstrainedSystem::new(
            SparseMatrix::identity(n),
            tridiag(n, 4.0, -1.0),
            SparseMatrix::zeros(0, n),
            Arc::new(move |t, _| a0.iter().zip(&a1).map(|(p, q)| p + q * t).collect()),
            Arc::new(|_| vec![]),
            Arc::new(|_| vec![]),
        )
        .unwrap();
        (sys, f0, f1)
    }

    fn exact(sys: &ConstrainedSystem, u0: &[f64], f0: &[f64], f1: &[f64], t: f64) -> Vec<f64> {
        let a: DenseMatrix = sys.stiffness().to_dense();
        polyrhs_solution(&a, u0, &[f0.to_vec(), f1.to_vec()], t).unwrap()
    }

    fn tight() -> FlowOptions {
        FlowOptions {
            tol: 1e-13,
            ..FlowOptions::default()
        }
    }

    #[test]
    fn second_order_exact_for_linear_forcing() {
        let n = 8;
        let (sys, f0, f1) = linear_forcing(n);
        let u0: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let want = exact(&sys, &u0, &f0, &f1, 0.3);
        let st = StepState::new(&sys, 0.0, u0.clone()).unwrap();
        let got = second_order_step(&sys, &st, 0.3, &tight()).unwrap();
        assert!(norm2(&sub(&got.u, &want)) <= 1e-11 * norm2(&want));
        for c2 in [0.5, 1.0, 2.0] {
            let got = family_step(&sys, &st, 0.3, c2, &tight()).unwrap();
            assert!(
                norm2(&sub(&got.u, &want)) <= 1e-11 * norm2(&want),
                "c2 = {c2}"
            );
        }
    }

    #[test]
    fn euler_exact_for_constant_forcing() {
        let n = 6;
        let (sys, f0, _) = linear_forcing(n);
        let f0c = f0.clone();
        let sys = ConstrainedSystem::new(
            sys.mass().clone(),
            sys.stiffness().clone(),
            SparseMatrix::zeros(0, n),
            Arc::new(move |_, _| f0c.clone()),
            Arc::new(|_| vec![]),
            Arc::new(|_| vec![]),
        )
        .unwrap();
        let u0 = vec![1.0; n];
        let want = exact(&sys, &u0, &f0, &vec![0.0; n], 1.0);
        let mut cfg = SchemeConfig::new(Scheme::ExpEuler);
        cfg.flow = tight();
        let traj = integrate(&sys, &cfg, &u0, 0.0, 1.0, 0.25, Record::All).unwrap();
        assert_eq!(traj.steps(), 4);
        assert_eq!(traj.states.len(), 5);
        assert!(norm2(&sub(&traj.final_state.u, &want)) <= 1e-11 * norm2(&want));
    }

    /// Constrained problem with `B = [1, -1, 0, ...]` and time-dependent `g`.
    fn constrained(n: usize) -> ConstrainedSystem {
        let b = SparseMatrix::from_triplets(1, n, &[(0, 0, 1.0), (0, 1, -1.0)]);
        ConstrainedSystem::new(
            tridiag(n, 2.0 / 3.0, 1.0 / 6.0),
            tridiag(n, 3.0, -1.0),
            b,
            Arc::new(|t, u: &[f64]| u.iter().map(|x| t.cos() - x * x * x).collect()),
            Arc::new(|t| vec![t.sin()]),
            Arc::new(|t| vec![t.cos()]),
        )
        .unwrap()
    }

    #[test]
    fn evaluation_counts_and_constraint() {
        let sys = constrained(10);
        let u0 = vec![0.1; 10];
        for (scheme, per_step) in [
            (Scheme::ExpEuler, 1),
            (Scheme::SecondOrder, 2),
            (Scheme::Family { c2: 0.5 }, 2),
        ] {
            let before = sys.f_evaluations();
            let traj = integrate(
                &sys,
                &SchemeConfig::new(scheme),
                &u0,
                0.0,
                1.0,
                0.125,
                Record::FinalOnly,
            )
            .unwrap();
            assert_eq!(sys.f_evaluations() - before, 8 * per_step, "{scheme}");
            assert!(traj.max_constraint_residual() <= 1e-12, "{scheme}");
            assert_eq!(traj.stats.repairs, 0);
        }
    }

    #[test]
    fn family_with_unit_node_matches_second_order() {
        let sys = constrained(12);
        let u0 = vec![0.2; 12];
        let run = |s| {
            let mut cfg = SchemeConfig::new(s);
            cfg.flow = tight();
            integrate(&sys, &cfg, &u0, 0.0, 0.5, 0.05, Record::FinalOnly)
                .unwrap()
                .final_state
                .u
        };
        let a = run(Scheme::SecondOrder);
        let b = run(Scheme::Family { c2: 1.0 });
        assert!(norm2(&sub(&a, &b)) <= 1e-10 * norm2(&a));
    }

    #[test]
    fn alt_euler_theta_zero_keeps_constraint() {
        let sys = constrained(10);
        let u0 = vec![0.0; 10];
        let cfg = SchemeConfig::new(Scheme::AltEuler { theta: 0.0 });
        let traj = integrate(&sys, &cfg, &u0, 0.0, 1.0, 0.1, Record::FinalOnly).unwrap();
        assert!(traj.max_constraint_residual() <= 1e-12);
        // θ = 1 lags the constraint by one step: B u_{n+1} = g(t_n).
        let cfg = SchemeConfig::new(Scheme::AltEuler { theta: 1.0 });
        let traj = integrate(&sys, &cfg, &u0, 0.0, 1.0, 0.1, Record::FinalOnly).unwrap();
        for r in &traj.records[1..] {
            let g = r.t.sin();
            let want = ((r.t - 0.1).sin() - g).abs() / (1.0 + g.abs());
            assert!((r.constraint_residual - want).abs() <= 1e-12, "t = {}", r.t);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let sys = constrained(6);
        let cfg = SchemeConfig::new(Scheme::ExpEuler);
        let bad = vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!(matches!(
            integrate(&sys, &cfg, &bad, 0.0, 1.0, 0.1, Record::FinalOnly),
            Err(crate::Error::InconsistentInitialData { .. })
        ));
        let u0 = vec![0.0; 6];
        assert!(matches!(
            integrate(&sys, &cfg, &u0, 0.0, 1.0, 0.3, Record::FinalOnly),
            Err(crate::Error::InvalidConfig(_))
        ));
        assert!(Scheme::from_id("alt-euler", None, Some(1.5)).is_err());
        assert!(Scheme::from_id("second-order-family", Some(0.0), None).is_err());
        assert!(Scheme::from_id("rk4", None, None).is_err());
        assert_eq!("exp-euler".parse::<Scheme>().unwrap(), Scheme::ExpEuler);
    }

    #[test]
    fn drifted_state_is_repaired() {
        let sys = constrained(6);
        let mut st = StepState::new(&sys, 0.0, vec![0.0; 6]).unwrap();
        st.u[0] = 1e-3;
        let mut stepper = Stepper::new(&sys, SchemeConfig::new(Scheme::ExpEuler)).unwrap();
        let next = stepper.step(&st, 0.1).unwrap();
        assert_eq!(stepper.stats().repairs, 1);
        assert!(sys.constraint_residual(next.t, &next.u).unwrap() <= 1e-12);
    }

    #[test]
    fn binary_and_csv_export() {
        let sys = constrained(5);
        let traj = integrate(
            &sys,
            &SchemeConfig::new(Scheme::ExpEuler),
            &[0.0; 5],
            0.0,
            0.5,
            0.1,
            Record::All,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("u.bin");
        write_states_binary(&bin, &traj.states).unwrap();
        assert_eq!(read_states_binary(&bin).unwrap(), traj.states);
        let mut buf = Vec::new();
        write_trajectory_csv_to(&mut buf, &traj.records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,t,constraint_residual,solution_norm");
        assert_eq!(lines.len(), 7);
        let last: Vec<f64> = lines[6]
            .split(',')
            .skip(1)
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(last[0], 0.5);
    }
}
