// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

//! Problem builders: the dynamic-boundary heat equation, the non-symmetric
//! coupled system and a random toy problem with a known solution.

mod config;
mod dynbc;
pub mod fem;
mod nonsym;
mod toy;

use std::fmt;
use std::sync::Arc;

pub use config::{parse_real, parse_real_list, KeyValueConfig};
pub use dynbc::{build_dynbc, DynBcConfig};
pub use nonsym::{build_nonsym, initial_series, NonSymConfig};
pub use toy::{build_toy, ToyConfig};

use crate::error::{Error, Result};
use crate::harness::Norm;
use crate::integrators::ConstrainedSystem;
use crate::linalg::DenseVector;

pub type ExactFn = Arc<dyn Fn(f64) -> DenseVector + Send + Sync>;

/// A built system with its initial value and time interval.
pub struct Problem {
    pub name: &'static str,
    /// Identifies the discrete problem; used in cache keys and CSV metadata.
    pub label: String,
    pub system: ConstrainedSystem,
    pub u0: DenseVector,
    pub t0: f64,
    pub t_end: f64,
    pub exact: Option<ExactFn>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("label", &self.label)
            .field("system", &self.system)
            .field("t_end", &self.t_end)
            .field("exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

/// Registered problem names.
pub const PROBLEM_NAMES: [&str; 3] = ["dynbc", "nonsym", "toy"];

/// Problem selection with its configuration.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSpec {
    DynBc(DynBcConfig),
    NonSym(NonSymConfig),
    Toy(ToyConfig),
}

impl ProblemSpec {
    /// Looks up `name` in the registry and reads its parameters from `c`.
    pub fn from_config(name: &str, c: &KeyValueConfig) -> Result<Self> {
        match name {
            "dynbc" => Ok(ProblemSpec::DynBc(DynBcConfig::from_config(c)?)),
            "nonsym" => Ok(ProblemSpec::NonSym(NonSymConfig::from_config(c)?)),
            "toy" => Ok(ProblemSpec::Toy(ToyConfig::from_config(c)?)),
            other => Err(Error::InvalidConfig(format!(
                "unknown problem `{other}` (available: {})",
                PROBLEM_NAMES.join(", ")
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::DynBc(_) => "dynbc",
            ProblemSpec::NonSym(_) => "nonsym",
            ProblemSpec::Toy(_) => "toy",
        }
    }

    pub fn t_end(&self) -> f64 {
        match self {
            ProblemSpec::DynBc(c) => c.t_end,
            ProblemSpec::NonSym(c) => c.t_end,
            ProblemSpec::Toy(c) => c.t_end,
        }
    }

    pub fn set_t_end(&mut self, t: f64) {
        match self {
            ProblemSpec::DynBc(c) => c.t_end = t,
            ProblemSpec::NonSym(c) => c.t_end = t,
            ProblemSpec::Toy(c) => c.t_end = t,
        }
    }

    /// The norm used for this problem's convergence plots.
    pub fn default_norm(&self) -> Norm {
        match self {
            ProblemSpec::NonSym(_) => Norm::H1,
            _ => Norm::Energy,
        }
    }

    pub fn build(&self) -> Result<Problem> {
        let mut p = match self {
            ProblemSpec::DynBc(c) => build_dynbc(c)?,
            ProblemSpec::NonSym(c) => build_nonsym(c)?,
            ProblemSpec::Toy(c) => build_toy(c)?,
        };
        p.t_end = self.t_end();
        Ok(p)
    }
}

/// One-line descriptions for `list-problems`.
pub fn describe_problems() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "dynbc",
            "heat equation on (0,1)^2 with dynamic boundary condition on y = 0; Q1 elements; keys: h, kappa, alpha, t_end",
        ),
        (
            "nonsym",
            "coupled 1D system with non-symmetric operator and constraint u(1) - v(1) = exp(2t) - 1; P1 elements; keys: h, k_trunc, t_end",
        ),
        ("toy", "random dense system with manufactured solution; keys: n, m, seed, symmetric, nonlinear, t_end"),
    ]
}
