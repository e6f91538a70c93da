// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::integrators::ConstrainedSystem;

/// Error norm for convergence studies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Norm {
    /// `sqrt(e^T A_sym e)`, `A_sym = (A + A^T)/2`.
    Energy,
    /// `sqrt(e^T (K + M) e)` with the problem's stiffness blocks `K`.
    H1,
    /// `sqrt(e^T M e)`.
    L2,
}

impl Norm {
    pub fn id(&self) -> &'static str {
        match self {
            Norm::Energy => "energy",
            Norm::H1 => "h1",
            Norm::L2 => "l2",
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "energy" | "a" => Ok(Norm::Energy),
            "h1" => Ok(Norm::H1),
            "l2" => Ok(Norm::L2),
            other => Err(Error::InvalidConfig(format!("unknown norm `{other}`"))),
        }
    }
}

/// Evaluates `|e|` in the requested discrete norm.
pub fn error_norm(sys: &ConstrainedSystem, e: &[f64], norm: Norm) -> Result<f64> {
    let q = match norm {
        // e^T A_sym e = e^T A e for real e.
        Norm::Energy => sys.stiffness().quad_form(e)?,
        Norm::H1 => {
            let k = sys.h1_stiffness().ok_or(Error::NormUnavailable("h1"))?;
            k.quad_form(e)? + sys.mass().quad_form(e)?
        }
        Norm::L2 => sys.mass().quad_form(e)?,
    };
    let scale = e.iter().map(|v| v * v).sum::<f64>();
    if q < -1e-12 * scale.max(1.0) {
        return Err(Error::NegativeEnergy(q));
    }
    Ok(q.max(0.0).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub tau: f64,
    pub error: f64,
    /// `log(e_{i-1}/e_i) / log(τ_{i-1}/τ_i)`; `log2` of the error ratio for halved steps.
    pub local_order: Option<f64>,
}

/// Errors at the final time against a reference, one row per step size.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub problem: String,
    pub scheme: String,
    pub norm: Norm,
    pub h: Option<f64>,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log error` against `log τ`.
    pub fitted_order: Option<f64>,
    /// Rows left out of the fit as pre-asymptotic.
    pub excluded: Vec<usize>,
}

impl ConvergenceTable {
    /// Builds the table; rows with `error > 0.5 * reference_norm` are excluded from the fit.
    pub fn new(
        problem: impl Into<String>,
        scheme: impl Into<String>,
        norm: Norm,
        h: Option<f64>,
        taus: &[f64],
        errors: &[f64],
        reference_norm: f64,
    ) -> Result<Self> {
        crate::error::check_dim("convergence table", taus.len(), errors.len())?;
        if taus.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidConfig(
                "step sizes must be strictly decreasing".into(),
            ));
        }
        if let Some(e) = errors.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "errors must be finite and positive, got {e}"
            )));
        }
        let rows = taus
            .iter()
            .zip(errors)
            .enumerate()
            .map(|(i, (&tau, &error))| ConvergenceRow {
                tau,
                error,
                local_order: (i > 0)
                    .then(|| (errors[i - 1] / error).ln() / (taus[i - 1] / tau).ln()),
            })
            .collect();
        let excluded: Vec<usize> = (0..errors.len())
            .filter(|&i| errors[i] > 0.5 * reference_norm)
            .collect();
        let mut table = ConvergenceTable {
            problem: problem.into(),
            scheme: scheme.into(),
            norm,
            h,
            rows,
            fitted_order: None,
            excluded,
        };
        table.fitted_order = table.fit(0);
        Ok(table)
    }

    /// Least-squares slope over the non-excluded rows from `skip` on.
    pub fn fit(&self, skip: usize) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .enumerate()
            .skip(skip)
            .filter(|(i, _)| !self.excluded.contains(i))
            .map(|(_, r)| (r.tau.ln(), r.error.ln()))
            .collect();
        least_squares_slope(&pts)
    }

    /// Fitted order with the coarsest step size dropped.
    pub fn fitted_order_without_coarsest(&self) -> Option<f64> {
        self.fit(1)
    }

    pub fn errors_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }

    pub fn taus(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.tau).collect()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }
}

/// Slope of the least-squares line through `(x, y)`; `None` for fewer than two distinct `x`.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `#` metadata lines followed by `tau,error,local_order`.
pub fn write_csv<W: Write>(w: &mut W, table: &ConvergenceTable) -> Result<()> {
    writeln!(w, "# problem={}", table.problem)?;
    writeln!(w, "# scheme={}", table.scheme)?;
    writeln!(w, "# norm={}", table.norm)?;
    if let Some(h) = table.h {
        writeln!(w, "# h={}", fmt_real(h))?;
    }
    if let Some(p) = table.fitted_order {
        writeln!(w, "# fitted_order={}", fmt_real(p))?;
    }
    if !table.excluded.is_empty() {
        let ex: Vec<String> = table.excluded.iter().map(usize::to_string).collect();
        writeln!(w, "# excluded_rows={}", ex.join(";"))?;
    }
    writeln!(w, "tau,error,local_order")?;
    for r in &table.rows {
        let lo = r.local_order.map(fmt_real).unwrap_or_default();
        writeln!(w, "{},{},{}", fmt_real(r.tau), fmt_real(r.error), lo)?;
    }
    Ok(())
}

pub fn emit_csv(table: &ConvergenceTable, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_csv(&mut w, table)?;
    w.flush()?;
    Ok(())
}

/// Parses text produced by [`write_csv`].
pub fn parse_csv(text: &str, origin: &str) -> Result<ConvergenceTable> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.into(),
        line,
        message,
    };
    let mut table = ConvergenceTable {
        problem: String::new(),
        scheme: String::new(),
        norm: Norm::Energy,
        h: None,
        rows: Vec::new(),
        fitted_order: None,
        excluded: Vec::new(),
    };
    let mut header = false;
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| err(ln, format!("bad number `{s}`")))
        };
        if let Some(meta) = line.strip_prefix('#') {
            let (k, v) = meta
                .trim()
                .split_once('=')
                .ok_or_else(|| err(ln, "metadata must be key=value".into()))?;
            match k {
                "problem" => table.problem = v.to_string(),
                "scheme" => table.scheme = v.to_string(),
                "norm" => table.norm = v.parse()?,
                "h" => table.h = Some(num(v)?),
                "fitted_order" => table.fitted_order = Some(num(v)?),
                "excluded_rows" => {
                    table.excluded = v
                        .split(';')
                        .map(|s| {
                            s.parse()
                                .map_err(|_| err(ln, format!("bad row index `{s}`")))
                        })
                        .collect::<Result<_>>()?
                }
                _ => {}
            }
        } else if !header {
            if line.trim() != "tau,error,local_order" {
                return Err(err(ln, format!("unexpected header `{line}`")));
            }
            header = true;
        } else if !line.trim().is_empty() {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(err(ln, format!("expected 3 columns, got {}", cols.len())));
            }
            table.rows.push(ConvergenceRow {
                tau: num(cols[0])?,
                error: num(cols[1])?,
                local_order: if cols[2].is_empty() {
                    None
                } else {
                    Some(num(cols[2])?)
                },
            });
        }
    }
    if !header {
        return Err(err(text.lines().count(), "missing header".into()));
    }
    Ok(table)
}
