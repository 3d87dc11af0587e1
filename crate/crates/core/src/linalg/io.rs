//! Matrix Market (coordinate, real, general) and one-value-per-line CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::sparse::SparseOperator;
use crate::error::{Error, Result};

fn parse_err(source_name: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        line,
        message: message.into(),
    }
}

pub fn parse_matrix_market(text: &str, source_name: &str) -> Result<SparseOperator> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(source_name, 1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(source_name, 1, "missing %%MatrixMarket matrix header"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(source_name, 1, format!("unsupported format '{}'", tokens[2])));
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(parse_err(source_name, 1, format!("unsupported field '{}'", tokens[3])));
    }
    if tokens[4] != "general" {
        return Err(parse_err(source_name, 1, format!("unsupported symmetry '{}'", tokens[4])));
    }

    let mut size = None;
    let mut triplets = Vec::new();
    for (idx, raw) in lines {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if parts.len() != 3 {
                    return Err(parse_err(source_name, lineno, "size line needs rows cols nnz"));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|e| parse_err(source_name, lineno, e.to_string()));
                let dims = (p(parts[0])?, p(parts[1])?, p(parts[2])?);
                triplets.reserve(dims.2);
                size = Some(dims);
            }
            Some((rows, cols, _)) => {
                if parts.len() != 3 {
                    return Err(parse_err(source_name, lineno, "entry needs row col value"));
                }
                let r: usize = parts[0].parse().map_err(|_| parse_err(source_name, lineno, "bad row index"))?;
                let c: usize = parts[1].parse().map_err(|_| parse_err(source_name, lineno, "bad column index"))?;
                let v: f64 = parts[2].parse().map_err(|_| parse_err(source_name, lineno, "bad value"))?;
                if r == 0 || c == 0 || r > rows || c > cols {
                    return Err(parse_err(source_name, lineno, format!("index ({r}, {c}) out of range")));
                }
                triplets.push((r - 1, c - 1, v));
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or_else(|| parse_err(source_name, 1, "missing size line"))?;
    if triplets.len() != nnz {
        return Err(parse_err(
            source_name,
            0,
            format!("declared {nnz} entries, found {}", triplets.len()),
        ));
    }
    SparseOperator::from_triplets(rows, cols, &triplets)
}

/// Entries are written with 17 significant digits so a read-back is exact.
pub fn format_matrix_market(a: &SparseOperator) -> String {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", a.rows(), a.cols(), a.nnz());
    for (r, c, v) in a.triplets() {
        let _ = writeln!(out, "{} {} {:.16e}", r + 1, c + 1, v);
    }
    out
}

pub fn read_matrix_market(path: &Path) -> Result<SparseOperator> {
    let text = fs::read_to_string(path)?;
    parse_matrix_market(&text, &path.display().to_string())
}

pub fn write_matrix_market(path: &Path, a: &SparseOperator) -> Result<()> {
    fs::write(path, format_matrix_market(a))?;
    Ok(())
}

pub fn parse_vector_csv(text: &str, source_name: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| parse_err(source_name, idx + 1, format!("not a number: '{line}'")))?;
        out.push(v);
    }
    Ok(out)
}

pub fn format_vector_csv(v: &[f64]) -> String {
    let mut out = String::with_capacity(v.len() * 24);
    for x in v {
        let _ = writeln!(out, "{x:.16e}");
    }
    out
}

pub fn read_vector_csv(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    parse_vector_csv(&text, &path.display().to_string())
}

pub fn write_vector_csv(path: &Path, v: &[f64]) -> Result<()> {
    fs::write(path, format_vector_csv(v))?;
    Ok(())
}
