// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

//! Convergence studies: error norms, reference solutions, tables and CSV output.

mod study;
mod table;

pub use study::{
    build_reference, halving_ladder, reference_flow_options, run_convergence, ReferenceSolution,
    StudyConfig, StudyReport,
};
pub use table::{
    emit_csv, error_norm, least_squares_slope, parse_csv, write_csv, ConvergenceRow,
    ConvergenceTable, Norm,
};

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::integrators::{Scheme, SchemeConfig};
    use crate::problems::{
        build_dynbc, build_nonsym, build_toy, DynBcConfig, NonSymConfig, ToyConfig,
    };

    #[test]
    fn norms_basic() {
        let p = build_dynbc(&DynBcConfig::with_mesh(8)).unwrap();
        let z = vec![0.0; p.system.n()];
        for n in [Norm::Energy, Norm::H1, Norm::L2] {
            assert_eq!(error_norm(&p.system, &z, n).unwrap(), 0.0);
        }
        // u0 is consistent, so it lies in ker B for g = 0.
        assert!(error_norm(&p.system, &p.u0, Norm::Energy).unwrap() > 0.0);
        let toy = build_toy(&ToyConfig::default()).unwrap();
        assert!(matches!(
            error_norm(&toy.system, &toy.u0, Norm::H1),
            Err(crate::Error::NormUnavailable(_))
        ));
    }

    #[test]
    fn h1_norm_of_sine() {
        // e = (sin(πx), 0): |e|_{H1}^2 = π²/2 + 1/2.
        let n = 512;
        let p = build_nonsym(&NonSymConfig::with_mesh(n)).unwrap();
        let mut e = vec![0.0; 2 * n];
        for i in 1..=n {
            e[i - 1] = (PI * i as f64 / n as f64).sin();
        }
        let got = error_norm(&p.system, &e, Norm::H1).unwrap();
        let want = (PI * PI / 2.0 + 0.5).sqrt();
        assert!((got / want - 1.0).abs() < 1e-2, "{got} vs {want}");
    }

    #[test]
    fn toy_study_measures_against_exact_solution() {
        let toy = build_toy(&ToyConfig {
            n: 10,
            m: 2,
            ..ToyConfig::default()
        })
        .unwrap();
        let study = StudyConfig::new(
            SchemeConfig::new(Scheme::ExpEuler),
            halving_ladder(0.05, 4),
            Norm::L2,
        );
        let (table, report) = run_convergence(&toy, &study).unwrap();
        assert_eq!(table.rows.len(), 4);
        assert!(table.errors_strictly_decreasing());
        assert!(report.tau_ref.is_none());
        assert!(report.max_constraint_residual < 1e-9);
    }

    #[test]
    fn reference_cache_is_bit_identical() {
        let p = build_dynbc(&DynBcConfig {
            t_end: 0.1,
            ..DynBcConfig::with_mesh(8)
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let a = build_reference(&p, 0.01, Some(dir.path())).unwrap();
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        let b = build_reference(&p, 0.01, Some(dir.path())).unwrap();
        assert_eq!(a, b);
        let c = build_reference(&p, 0.01, None).unwrap();
        assert_eq!(a.state, c.state);
    }

    #[test]
    fn toy_reference_matches_exact() {
        let toy = build_toy(&ToyConfig::default()).unwrap();
        let exact = (toy.exact.as_ref().unwrap())(toy.t_end);
        let err = |tau: f64| {
            let r = build_reference(&toy, tau, None).unwrap();
            crate::linalg::norm2(&crate::linalg::sub(&r.state, &exact))
        };
        let (coarse, fine) = (err(1.0 / 16384.0), err(1.0 / 32768.0));
        assert!(fine <= 1e-8, "{fine}");
        assert!((coarse / fine - 4.0).abs() < 0.2, "{coarse} / {fine}");
    }

    #[test]
    fn reference_step_must_be_fine_enough() {
        let p = build_dynbc(&DynBcConfig::with_mesh(4)).unwrap();
        let mut study = StudyConfig::new(
            SchemeConfig::new(Scheme::ExpEuler),
            vec![0.1, 0.05],
            Norm::Energy,
        );
        study.tau_ref = Some(0.01);
        assert!(matches!(
            run_convergence(&p, &study),
            Err(crate::Error::InvalidConfig(_))
        ));
    }
}
