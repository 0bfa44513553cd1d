//! CSV exchange format for distance matrices: either a full square matrix
//! or a strict lower triangle (`n - 1` lines of lengths `1..n-1`).

use std::io::Write;
use std::path::Path;

use super::matrix::DistanceMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const DIAGONAL_TOLERANCE: f64 = 1e-12;
const SYMMETRY_TOLERANCE: f64 = 1e-9;

pub fn load_distance_matrix<T: Scalar>(path: impl AsRef<Path>) -> Result<DistanceMatrix<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_distance_matrix(&text)
}

pub fn parse_distance_matrix<T: Scalar>(text: &str) -> Result<DistanceMatrix<T>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, usize> = cells
            .iter()
            .enumerate()
            .map(|(c, s)| s.parse::<f64>().map_err(|_| c))
            .collect();
        match parsed {
            Ok(v) => {
                if let Some(c) = v.iter().position(|x| !x.is_finite()) {
                    return Err(Error::NonFinite {
                        row: r,
                        col: c,
                        value: cells[c].to_string(),
                    });
                }
                rows.push(v)
            }
            // A non-numeric first line is a header.
            Err(_) if rows.is_empty() && r == 0 => continue,
            Err(c) => {
                return Err(Error::Parse {
                    row: r,
                    col: c,
                    value: cells[c].to_string(),
                })
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Empty("distance file has no rows".into()));
    }

    let is_lower = rows.iter().enumerate().all(|(i, r)| r.len() == i + 1);
    let is_square = rows.iter().all(|r| r.len() == rows.len());

    let (n, values) = if is_square && rows.len() >= 2 {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row[i].abs() > DIAGONAL_TOLERANCE {
                return Err(Error::InvalidDistanceMatrix(format!(
                    "diagonal entry ({i},{i}) = {} is not zero",
                    row[i]
                )));
            }
        }
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::InvalidDistanceMatrix(format!(
                        "asymmetric entries ({i},{j}) = {a} and ({j},{i}) = {b}"
                    )));
                }
                let v = 0.5 * (a + b);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        (n, values)
    } else if is_lower {
        let n = rows.len() + 1;
        let mut values = vec![0.0; n * n];
        for (r, row) in rows.iter().enumerate() {
            let i = r + 1;
            for (j, &v) in row.iter().enumerate() {
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        (n, values)
    } else {
        return Err(Error::InvalidDistanceMatrix(
            "neither a square matrix nor a strict lower triangle".into(),
        ));
    };

    if let Some(pos) = values.iter().position(|&v| v < 0.0) {
        return Err(Error::InvalidDistanceMatrix(format!(
            "negative entry at ({}, {})",
            pos / n,
            pos % n
        )));
    }
    DistanceMatrix::from_values(n, values.into_iter().map(T::lit).collect())
}

/// Writes the full square matrix, one row per line, shortest round-trip formatting.
pub fn write_distance_matrix<T: Scalar, W: Write>(mut out: W, d: &DistanceMatrix<T>) -> Result<()> {
    let mut line = String::new();
    for i in 0..d.n() {
        line.clear();
        for (j, v) in d.row(i).iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())
            .map_err(|e| Error::io("<distance writer>", e))?;
    }
    Ok(())
}
