// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

//! One-step maps of the exponential integrators.
//!
//! Every scheme reduces to stationary saddle solves with `(A, B)` and flows of
//! the homogeneous DAE. Right-hand sides follow one convention: `f` is a load
//! vector while `B^- g'` and the auxiliary `w'` are coefficient vectors, so
//! the latter enter saddle right-hand sides multiplied by `M`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::flow::{flow, FlowOptions};
use crate::integrators::ConstrainedSystem;
use crate::linalg::{add, axpy, norm2, sub, DenseVector};

/// Scheme selection with its parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scheme {
    ExpEuler,
    SecondOrder,
    /// Two-stage family with interior node `t_n + c2 τ`, `c2 > 0`.
    Family {
        c2: f64,
    },
    /// Euler variant obtained from the ε-regularized system, `θ ∈ [0, 1]`.
    AltEuler {
        theta: f64,
    },
}

impl Scheme {
    pub fn id(&self) -> &'static str {
        match self {
            Scheme::ExpEuler => "exp-euler",
            Scheme::SecondOrder => "second-order",
            Scheme::Family { .. } => "second-order-family",
            Scheme::AltEuler { .. } => "alt-euler",
        }
    }

    /// Builds a scheme from its id; `c2` and `theta` default to 1.
    pub fn from_id(id: &str, c2: Option<f64>, theta: Option<f64>) -> Result<Self> {
        let s = match id {
            "exp-euler" | "euler" => Scheme::ExpEuler,
            "second-order" | "second" => Scheme::SecondOrder,
            "second-order-family" | "family" => Scheme::Family {
                c2: c2.unwrap_or(1.0),
            },
            "alt-euler" => Scheme::AltEuler {
                theta: theta.unwrap_or(1.0),
            },
            other => return Err(Error::InvalidConfig(format!("unknown scheme `{other}`"))),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Scheme::Family { c2 } if !(c2 > 0.0 && c2.is_finite()) => Err(Error::InvalidConfig(
                format!("c2 must be positive, got {c2}"),
            )),
            Scheme::AltEuler { theta } if !(0.0..=1.0).contains(&theta) => Err(
                Error::InvalidConfig(format!("theta must lie in [0, 1], got {theta}")),
            ),
            _ => Ok(()),
        }
    }

    /// Whether `B u_{n+1} = g(t_{n+1})` holds after every step.
    pub fn keeps_constraint(&self) -> bool {
        !matches!(self, Scheme::AltEuler { theta } if *theta > 0.0)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Family { c2 } => write!(f, "{}(c2={c2})", self.id()),
            Scheme::AltEuler { theta } => write!(f, "{}(theta={theta})", self.id()),
            _ => f.write_str(self.id()),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::from_id(s, None, None)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub flow: FlowOptions,
    /// Relative tolerance on `|B u_n - g(t_n)| / (1 + |g|)`.
    pub consistency_tol: f64,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme) -> Self {
        SchemeConfig {
            scheme,
            flow: FlowOptions::default(),
            consistency_tol: 1e-9,
        }
    }

    pub fn with_flow_tol(mut self, tol: f64) -> Self {
        self.flow.tol = tol;
        self
    }
}

/// Approximation `u_n ≈ u(t_n)` together with `B^- g(t_n)` and `B^- g'(t_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepState {
    pub t: f64,
    pub u: DenseVector,
    pub bg: DenseVector,
    pub bgdot: DenseVector,
}

impl StepState {
    pub fn new(sys: &ConstrainedSystem, t: f64, u: DenseVector) -> Result<Self> {
        crate::error::check_dim("state", sys.n(), u.len())?;
        let bg = sys.b_minus(&sys.eval_g(t)?)?;
        let bgdot = sys.b_minus(&sys.eval_gdot(t)?)?;
        Ok(StepState { t, u, bg, bgdot })
    }
}

/// Krylov statistics accumulated over flows.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FlowStats {
    pub flows: usize,
    pub max_basis_size: usize,
    pub total_substeps: usize,
    /// Largest `|B x| / |x|` before the final kernel projection.
    pub max_drift: f64,
    pub max_orthonormality: f64,
    pub max_relation_residual: f64,
    /// Inconsistent states repaired by projection.
    pub repairs: usize,
}

/// Applies one scheme repeatedly and tracks Krylov statistics.
pub struct Stepper<'a> {
    sys: &'a ConstrainedSystem,
    cfg: SchemeConfig,
    stats: FlowStats,
}

struct EulerParts {
    u_next: DenseVector,
    f_n: DenseVector,
    bg_next: DenseVector,
    bgdot_next: DenseVector,
}

impl<'a> Stepper<'a> {
    pub fn new(sys: &'a ConstrainedSystem, cfg: SchemeConfig) -> Result<Self> {
        cfg.scheme.validate()?;
        Ok(Stepper {
            sys,
            cfg,
            stats: FlowStats::default(),
        })
    }

    pub fn stats(&self) -> FlowStats {
        self.stats
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    /// Advances `state` by `tau`.
    pub fn step(&mut self, state: &StepState, tau: f64) -> Result<StepState> {
        if !(tau > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "step size must be positive, got {tau}"
            )));
        }
        match self.cfg.scheme {
            Scheme::AltEuler { theta } => self.alt_euler(state, tau, theta),
            scheme => {
                let repaired = self.ensure_consistent(state)?;
                let state = repaired.as_ref().unwrap_or(state);
                match scheme {
                    Scheme::ExpEuler => {
                        let p = self.euler(state, tau)?;
                        Ok(StepState {
                            t: state.t + tau,
                            u: p.u_next,
                            bg: p.bg_next,
                            bgdot: p.bgdot_next,
                        })
                    }
                    Scheme::SecondOrder => self.second_order(state, tau),
                    Scheme::Family { c2 } => self.family(state, tau, c2),
                    Scheme::AltEuler { .. } => unreachable!(),
                }
            }
        }
    }

    /// Projects `u_n` back onto `{B u = g(t_n)}` if it drifted beyond tolerance.
    fn ensure_consistent(&mut self, state: &StepState) -> Result<Option<StepState>> {
        let res = self.sys.constraint_residual(state.t, &state.u)?;
        if res <= self.cfg.consistency_tol {
            return Ok(None);
        }
        log::warn!(
            "state at t = {} violates the constraint ({res:.3e}); projecting",
            state.t
        );
        self.stats.repairs += 1;
        let ker = self.sys.dae_operator().project(&sub(&state.u, &state.bg))?;
        Ok(Some(StepState {
            u: add(&state.bg, &ker),
            ..state.clone()
        }))
    }

    fn flow(&mut self, x0: &[f64], t: f64) -> Result<DenseVector> {
        let op = self.sys.dae_operator();
        let nrm = norm2(x0);
        let drift = op.constraint_residual(x0)?;
        let projected;
        let x0 = if drift > self.cfg.flow.consistency_tol * 0.5 * nrm {
            log::debug!("projecting flow initial value (|Bx| = {drift:.3e})");
            projected = op.project(x0)?;
            &projected[..]
        } else {
            x0
        };
        let res = flow(op, x0, t, &self.cfg.flow)?;
        let s = &mut self.stats;
        s.flows += 1;
        s.max_basis_size = s.max_basis_size.max(res.basis_size);
        s.total_substeps += res.substeps;
        s.max_drift = s.max_drift.max(res.drift);
        if let Some(d) = res.diagnostics {
            s.max_orthonormality = s.max_orthonormality.max(d.orthonormality);
            s.max_relation_residual = s.max_relation_residual.max(d.relation_residual);
        }
        Ok(res.x_t)
    }

    /// `M v` subtracted from a load vector.
    fn load_minus_mass(&self, load: &[f64], v: &[f64]) -> Result<DenseVector> {
        let mv = self.sys.mass().mul_vec(v)?;
        Ok(sub(load, &mv))
    }

    fn euler(&mut self, st: &StepState, tau: f64) -> Result<EulerParts> {
        let sys = self.sys;
        let t1 = st.t + tau;
        let f_n = sys.eval_f(st.t, &st.u)?;
        let w = sys.w_solve(&self.load_minus_mass(&f_n, &st.bgdot)?)?;
        let mut z0 = sub(&st.u, &st.bg);
        axpy(-1.0, &w, &mut z0);
        let z1 = self.flow(&z0, tau)?;
        let bg_next = sys.b_minus(&sys.eval_g(t1)?)?;
        let bgdot_next = sys.b_minus(&sys.eval_gdot(t1)?)?;
        let mut u_next = add(&bg_next, &z1);
        axpy(1.0, &w, &mut u_next);
        Ok(EulerParts {
            u_next,
            f_n,
            bg_next,
            bgdot_next,
        })
    }

    fn second_order(&mut self, st: &StepState, tau: f64) -> Result<StepState> {
        let sys = self.sys;
        let t1 = st.t + tau;
        let eul = self.euler(st, tau)?;
        let f_1 = sys.eval_f(t1, &eul.u_next)?;
        // (f(t_{n+1}, u^Eul) - f(t_n, u_n)) - M (B^- g'_{n+1} - B^- g'_n)
        let rhs = self.load_minus_mass(&sub(&f_1, &eul.f_n), &sub(&eul.bgdot_next, &st.bgdot))?;
        let w1 = sys.w_solve(&rhs)?;
        let w2 = self.w2_from(&w1, tau)?;
        let z = self.flow(&w2, tau)?;
        let mut u = add(&eul.u_next, &z);
        axpy(-1.0, &w2, &mut u);
        axpy(1.0, &w1, &mut u);
        Ok(StepState {
            t: t1,
            u,
            bg: eul.bg_next,
            bgdot: eul.bgdot_next,
        })
    }

    /// `w''` with `A w'' + B^T ν = M w' / τ`, `B w'' = 0`.
    fn w2_from(&self, w1: &[f64], tau: f64) -> Result<DenseVector> {
        let mut rhs = self.sys.mass().mul_vec(w1)?;
        rhs.iter_mut().for_each(|v| *v /= tau);
        self.sys.w_solve(&rhs)
    }

    fn family(&mut self, st: &StepState, tau: f64, c2: f64) -> Result<StepState> {
        let sys = self.sys;
        let t1 = st.t + tau;
        let t2 = st.t + c2 * tau;
        let bg2 = sys.b_minus(&sys.eval_g(t2)?)?;
        let bgdot2 = sys.b_minus(&sys.eval_gdot(t2)?)?;
        let bg1 = sys.b_minus(&sys.eval_g(t1)?)?;
        let bgdot1 = sys.b_minus(&sys.eval_gdot(t1)?)?;

        let f_n = sys.eval_f(st.t, &st.u)?;
        let w = sys.w_solve(&self.load_minus_mass(&f_n, &st.bgdot)?)?;
        let mut z0 = sub(&st.u, &st.bg);
        axpy(-1.0, &w, &mut z0);

        let mut u2 = self.flow(&z0, c2 * tau)?;
        axpy(1.0, &w, &mut u2);
        axpy(1.0, &bg2, &mut u2);

        let f_2 = sys.eval_f(t2, &u2)?;
        let mut rhs = self.load_minus_mass(&sub(&f_2, &f_n), &sub(&bgdot2, &st.bgdot))?;
        rhs.iter_mut().for_each(|v| *v /= c2);
        let w1 = sys.w_solve(&rhs)?;
        let w2 = self.w2_from(&w1, tau)?;

        let z = self.flow(&add(&z0, &w2), tau)?;
        let mut u = add(&z, &w);
        axpy(1.0, &w1, &mut u);
        axpy(-1.0, &w2, &mut u);
        axpy(1.0, &bg1, &mut u);
        Ok(StepState {
            t: t1,
            u,
            bg: bg1,
            bgdot: bgdot1,
        })
    }

    fn alt_euler(&mut self, st: &StepState, tau: f64, theta: f64) -> Result<StepState> {
        let sys = self.sys;
        let t1 = st.t + tau;
        let g_n = sys.eval_g(st.t)?;
        let g_1 = sys.eval_g(t1)?;
        let g_theta: DenseVector = g_n
            .iter()
            .zip(&g_1)
            .map(|(a, b)| theta * a + (1.0 - theta) * b)
            .collect();
        let f_n = sys.eval_f(st.t, &st.u)?;
        let w_bar = sys.stiffness_saddle().solve(&f_n, &g_theta)?.x;
        let z0 = sub(&st.u, &w_bar);
        // Inconsistent z0 is projected inside `flow`.
        let z1 = self.flow(&z0, tau)?;
        let u = add(&z1, &w_bar);
        let bg = sys.b_minus(&g_1)?;
        let bgdot = sys.b_minus(&sys.eval_gdot(t1)?)?;
        Ok(StepState {
            t: t1,
            u,
            bg,
            bgdot,
        })
    }
}

fn one_step(
    sys: &ConstrainedSystem,
    state: &StepState,
    tau: f64,
    cfg: SchemeConfig,
) -> Result<StepState> {
    Stepper::new(sys, cfg)?.step(state, tau)
}

/// One exponential Euler step.
pub fn euler_step(
    sys: &ConstrainedSystem,
    state: &StepState,
    tau: f64,
    flow: &FlowOptions,
) -> Result<StepState> {
    let mut cfg = SchemeConfig::new(Scheme::ExpEuler);
    cfg.flow = flow.clone();
    one_step(sys, state, tau, cfg)
}

/// One step of the second-order scheme.
pub fn second_order_step(
    sys: &ConstrainedSystem,
    state: &StepState,
    tau: f64,
    flow: &FlowOptions,
) -> Result<StepState> {
    let mut cfg = SchemeConfig::new(Scheme::SecondOrder);
    cfg.flow = flow.clone();
    one_step(sys, state, tau, cfg)
}

/// One step of the `c2`-family.
pub fn family_step(
    sys: &ConstrainedSystem,
    state: &StepState,
    tau: f64,
    c2: f64,
    flow: &FlowOptions,
) -> Result<StepState> {
    let mut cfg = SchemeConfig::new(Scheme::Family { c2 });
    cfg.flow = flow.clone();
    one_step(sys, state, tau, cfg)
}

/// One step of the alternative Euler scheme.
pub fn alt_euler_step(
    sys: &ConstrainedSystem,
    state: &StepState,
    tau: f64,
    theta: f64,
    flow: &FlowOptions,
) -> Result<StepState> {
    let mut cfg = SchemeConfig::new(Scheme::AltEuler { theta });
    cfg.flow = flow.clone();
    one_step(sys, state, tau, cfg)
}
