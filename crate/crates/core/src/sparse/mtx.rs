//! Matrix Market I/O.
//!
//! Matrices are written as `coordinate real general` with 1-based indices.
//! Vectors are written as `array real general` (one column). Reading also
//! accepts `coordinate real symmetric` (lower triangle expanded) and plain
//! whitespace-separated vectors.
//!
//! Values are printed with Rust's shortest round-trip formatting, so a
//! write/read cycle reproduces every `f64` bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use super::CsrMatrix;
use crate::{Error, Result};

pub fn render_matrix(a: &CsrMatrix) -> String {
    let mut out = String::with_capacity(32 * a.nnz() + 64);
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let _ = writeln!(out, "{} {} {:e}", i + 1, j + 1, v);
        }
    }
    out
}

pub fn render_vector(x: &[f64]) -> String {
    let mut out = String::with_capacity(24 * x.len() + 64);
    out.push_str("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(out, "{} 1", x.len());
    for v in x {
        let _ = writeln!(out, "{v:e}");
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        location: format!("line {line}"),
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| perr(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| perr(line, format!("invalid {what}")))
}

/// Lines after the banner with comments and blanks stripped, numbered from 1.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'))
}

pub fn parse_matrix(text: &str) -> Result<CsrMatrix> {
    let banner = text.lines().next().unwrap_or("").to_ascii_lowercase();
    let fields: Vec<&str> = banner.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(perr(1, "missing %%MatrixMarket matrix banner"));
    }
    if fields[2] != "coordinate" {
        return Err(perr(1, "expected coordinate format for a matrix"));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(perr(1, format!("unsupported field '{}'", fields[3])));
    }
    let symmetric = match fields[4] {
        "general" => false,
        "symmetric" => true,
        other => return Err(perr(1, format!("unsupported symmetry '{other}'"))),
    };
    let mut lines = data_lines(text);
    let (ln, size) = lines.next().ok_or_else(|| perr(2, "missing size line"))?;
    let mut toks = size.split_whitespace();
    let nrows: usize = num(toks.next(), ln, "row count")?;
    let ncols: usize = num(toks.next(), ln, "column count")?;
    let nnz: usize = num(toks.next(), ln, "entry count")?;
    let mut triplets = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    for (ln, l) in lines {
        let mut toks = l.split_whitespace();
        let i: usize = num(toks.next(), ln, "row index")?;
        let j: usize = num(toks.next(), ln, "column index")?;
        let v: f64 = num(toks.next(), ln, "value")?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(perr(ln, format!("entry ({i},{j}) outside {nrows}x{ncols}")));
        }
        triplets.push((i - 1, j - 1, v));
        if symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
    }
    let read = if symmetric {
        triplets.iter().filter(|t| t.0 >= t.1).count()
    } else {
        triplets.len()
    };
    if read != nnz {
        return Err(perr(0, format!("header declares {nnz} entries, found {read}")));
    }
    CsrMatrix::from_triplets(nrows, ncols, &triplets)
}

/// Parses a Matrix Market array (single column) or a plain whitespace-separated vector.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let first = text.lines().next().unwrap_or("");
    if first.to_ascii_lowercase().starts_with("%%matrixmarket") {
        let fields: Vec<String> = first.to_ascii_lowercase().split_whitespace().map(String::from).collect();
        if fields.get(2).map(String::as_str) != Some("array") {
            return Err(perr(1, "expected array format for a vector"));
        }
        let mut lines = data_lines(text);
        let (ln, size) = lines.next().ok_or_else(|| perr(2, "missing size line"))?;
        let mut toks = size.split_whitespace();
        let n: usize = num(toks.next(), ln, "row count")?;
        let m: usize = num(toks.next(), ln, "column count")?;
        if m != 1 {
            return Err(perr(ln, "vector must have exactly one column"));
        }
        let mut out = Vec::with_capacity(n);
        for (ln, l) in lines {
            for tok in l.split_whitespace() {
                out.push(num(Some(tok), ln, "value")?);
            }
        }
        if out.len() != n {
            return Err(perr(0, format!("header declares {n} values, found {}", out.len())));
        }
        Ok(out)
    } else {
        let mut out = Vec::new();
        for (i, l) in text.lines().enumerate() {
            let l = l.split('#').next().unwrap_or("");
            for tok in l.split_whitespace() {
                out.push(num(Some(tok), i + 1, "value")?);
            }
        }
        Ok(out)
    }
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text).map_err(|e| with_path(e, path))
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vector(&text).map_err(|e| with_path(e, path))
}

pub fn write_matrix(path: impl AsRef<Path>, a: &CsrMatrix) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_matrix(a)).map_err(|e| Error::io(path, e))
}

pub fn write_vector(path: impl AsRef<Path>, x: &[f64]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_vector(x)).map_err(|e| Error::io(path, e))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse { location, msg } => Error::Parse {
            location: format!("{}:{location}", path.display()),
            msg,
        },
        other => other,
    }
}
