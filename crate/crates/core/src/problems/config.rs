// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Flat `key = value` configuration. `#` starts a comment; blank lines are ignored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyValueConfig {
    entries: BTreeMap<String, String>,
}

impl KeyValueConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.into(),
                line: lineno + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let k = normalize_key(k);
            if k.is_empty() {
                return Err(Error::Parse {
                    path: origin.into(),
                    line: lineno + 1,
                    message: "empty key".into(),
                });
            }
            entries.insert(k, v.trim().to_string());
        }
        Ok(KeyValueConfig { entries })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Inserts or replaces a value; keys are case-insensitive and `-` equals `_`.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(normalize_key(key), value.into());
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.entries.remove(&normalize_key(key))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize_key(key)).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Parses `key` as `T`, or returns `None` when absent.
    pub fn get_parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::InvalidConfig(format!("invalid value `{v}` for `{key}`"))),
        }
    }

    /// Real number; also accepts fractions such as `1/32`.
    pub fn get_real(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| parse_real(v).map_err(|e| with_key(e, key)))
            .transpose()
    }

    pub fn get_real_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| parse_real_list(v).map_err(|e| with_key(e, key)))
            .transpose()
    }

    /// Mesh parameter `N` from `n_mesh`, or from `h` as `1/h`.
    pub fn mesh_parameter(&self) -> Result<Option<usize>> {
        if let Some(n) = self.get_parsed::<usize>("n_mesh")? {
            return Ok(Some(n));
        }
        match self.get_real("h")? {
            None => Ok(None),
            Some(h) => {
                let n = (1.0 / h).round();
                if !(h > 0.0) || n < 1.0 || ((1.0 / h) - n).abs() > 1e-6 * n {
                    return Err(Error::InvalidConfig(format!(
                        "h = {h} is not 1/N for an integer N"
                    )));
                }
                Ok(Some(n as usize))
            }
        }
    }
}

fn with_key(e: Error, key: &str) -> Error {
    match e {
        Error::InvalidConfig(msg) => Error::InvalidConfig(format!("{key}: {msg}")),
        other => other,
    }
}

fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('-', "_")
}

/// Parses `0.05`, `1e-3` or `1/32`.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::InvalidConfig(format!("`{s}` is not a real number"));
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            a / b
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

pub fn parse_real_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(parse_real)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_fractions() {
        let c = KeyValueConfig::parse(
            "# study\nproblem = dynbc\nh=1/32  # mesh\n\nTAUS = 0.05, 0.025\n",
            "x",
        )
        .unwrap();
        assert_eq!(c.get("problem"), Some("dynbc"));
        assert_eq!(c.mesh_parameter().unwrap(), Some(32));
        assert_eq!(c.get_real_list("taus").unwrap().unwrap(), vec![0.05, 0.025]);
        assert_eq!(c.get_real("missing").unwrap(), None);
    }

    #[test]
    fn reports_bad_lines() {
        let e = KeyValueConfig::parse("a = 1\nnonsense\n", "cfg.txt").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let c = KeyValueConfig::parse("h = 0.3", "x").unwrap();
        assert!(c.mesh_parameter().is_err());
        assert!(parse_real("abc").is_err());
        assert!(parse_real("1/0").is_err());
    }

    #[test]
    fn set_overrides() {
        let mut c = KeyValueConfig::parse("t-end = 1", "x").unwrap();
        c.set("t_end", "0.7");
        assert_eq!(c.get_real("t-end").unwrap(), Some(0.7));
        assert_eq!(c.remove("T_END").as_deref(), Some("0.7"));
        assert!(!c.contains("t_end"));
    }
}
