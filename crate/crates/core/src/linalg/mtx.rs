// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

//! Reader for Matrix Market coordinate files (`real`, `general` or `symmetric`).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_matrix_market(&text).map_err(|(line, message)| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    })
}

/// Parses the file contents; errors carry a 1-based line number.
pub fn parse_matrix_market(text: &str) -> std::result::Result<SparseMatrix, (usize, String)> {
    let mut lines = text.lines().enumerate();
    let (_, banner) = lines.next().ok_or((1, "empty file".to_string()))?;
    let tokens: Vec<String> = banner.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err((1, format!("bad banner `{banner}`")));
    }
    if tokens[2] != "coordinate" {
        return Err((1, format!("unsupported format `{}`", tokens[2])));
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err((1, format!("unsupported field `{}`", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err((1, format!("unsupported symmetry `{other}`"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if parts.len() != 3 {
                    return Err((lineno, "expected `rows cols entries`".into()));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|e| (lineno, e.to_string()));
                let dims = (p(parts[0])?, p(parts[1])?, p(parts[2])?);
                triplets.reserve(if symmetric { 2 * dims.2 } else { dims.2 });
                size = Some(dims);
            }
            Some((nr, nc, _)) => {
                if parts.len() != 3 {
                    return Err((lineno, "expected `row col value`".into()));
                }
                let i: usize = parts[0]
                    .parse()
                    .map_err(|_| (lineno, "bad row index".to_string()))?;
                let j: usize = parts[1]
                    .parse()
                    .map_err(|_| (lineno, "bad column index".to_string()))?;
                let v: f64 = parts[2]
                    .parse()
                    .map_err(|_| (lineno, "bad value".to_string()))?;
                if i == 0 || j == 0 || i > nr || j > nc {
                    return Err((lineno, format!("index ({i}, {j}) out of range")));
                }
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (nr, nc, nnz) = size.ok_or((0, "missing size line".to_string()))?;
    let stored = if symmetric {
        triplets.iter().filter(|(i, j, _)| i >= j).count()
    } else {
        triplets.len()
    };
    if stored != nnz {
        return Err((0, format!("expected {nnz} entries, found {stored}")));
    }
    Ok(SparseMatrix::from_triplets(nr, nc, &triplets))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_and_symmetric() {
        let g =
            "%%MatrixMarket matrix coordinate real general\n% comment\n2 3 2\n1 1 1.5\n2 3 -2\n";
        let a = parse_matrix_market(g).unwrap();
        assert_eq!((a.nrows(), a.ncols(), a.nnz()), (2, 3, 2));
        assert_eq!(a.get(1, 2), -2.0);

        let s = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 4\n2 1 1\n";
        let b = parse_matrix_market(s).unwrap();
        assert_eq!(b.get(0, 1), 1.0);
        assert_eq!(b.get(1, 0), 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_matrix_market("%%MatrixMarket matrix array real general\n1 1\n1\n").is_err());
        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        assert_eq!(parse_matrix_market(bad).unwrap_err().0, 3);
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n";
        assert!(parse_matrix_market(short).is_err());
    }

    #[test]
    fn reads_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.mtx");
        std::fs::write(
            &p,
            "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 2.0\n",
        )
        .unwrap();
        assert_eq!(read_matrix_market(&p).unwrap().get(0, 0), 2.0);
        assert!(matches!(
            read_matrix_market(dir.path().join("nope.mtx")),
            Err(Error::Io(_))
        ));
    }
}
