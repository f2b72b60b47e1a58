//! Matrix Market exchange format, coordinate layout.
//!
//! Reads real and complex fields with general or symmetric symmetry and
//! 1-based indices; writes 17 significant digits so a textual round trip
//! reproduces every value bit for bit.

use crate::error::{Error, Result};
use crate::linalg::{CooMatrix, CscMatrix};
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_error(path: &Path, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens with their 1-based starting columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

pub fn read_matrix(path: &Path) -> Result<CscMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, 1, "empty file"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() < 5 || !head[0].eq_ignore_ascii_case("%%MatrixMarket") {
        return Err(parse_error(path, 1, 1, "expected a %%MatrixMarket header"));
    }
    if !head[1].eq_ignore_ascii_case("matrix") || !head[2].eq_ignore_ascii_case("coordinate") {
        return Err(parse_error(path, 1, 1, "only coordinate matrices are supported"));
    }
    let field = match head[3].to_ascii_lowercase().as_str() {
        "real" | "integer" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(parse_error(path, 1, 1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match head[4].to_ascii_lowercase().as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(parse_error(path, 1, 1, format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut coo: Option<CooMatrix> = None;
    let mut seen = 0usize;
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim_start().starts_with('%') {
            continue;
        }
        let toks = tokens(line);
        if toks.is_empty() {
            continue;
        }
        let int_at = |k: usize| -> Result<usize> {
            let (col, tok) = toks[k];
            tok.parse::<usize>()
                .map_err(|_| parse_error(path, lineno, col, format!("expected an integer, got '{tok}'")))
        };
        let float_at = |k: usize| -> Result<f64> {
            let (col, tok) = toks[k];
            tok.parse::<f64>()
                .map_err(|_| parse_error(path, lineno, col, format!("expected a number, got '{tok}'")))
        };
        match size {
            None => {
                if toks.len() != 3 {
                    return Err(parse_error(path, lineno, toks[0].0, "size line needs rows, cols, nnz"));
                }
                let (r, c, nnz) = (int_at(0)?, int_at(1)?, int_at(2)?);
                size = Some((r, c, nnz));
                coo = Some(CooMatrix::new(r, c));
            }
            Some((rows, cols, nnz)) => {
                let want = match field {
                    Field::Real => 3,
                    Field::Complex => 4,
                };
                if toks.len() != want {
                    return Err(parse_error(path, lineno, toks[0].0, format!("entry needs {want} fields")));
                }
                let (r, c) = (int_at(0)?, int_at(1)?);
                if r == 0 || r > rows {
                    return Err(parse_error(path, lineno, toks[0].0, format!("row index {r} outside 1..={rows}")));
                }
                if c == 0 || c > cols {
                    return Err(parse_error(path, lineno, toks[1].0, format!("column index {c} outside 1..={cols}")));
                }
                let v = match field {
                    Field::Real => Complex64::new(float_at(2)?, 0.0),
                    Field::Complex => Complex64::new(float_at(2)?, float_at(3)?),
                };
                let m = coo.as_mut().expect("size line seen");
                m.push(r - 1, c - 1, v);
                if symmetry == Symmetry::Symmetric && r != c {
                    m.push(c - 1, r - 1, v);
                }
                seen += 1;
                if seen > nnz {
                    return Err(parse_error(path, lineno, toks[0].0, format!("more than {nnz} declared entries")));
                }
            }
        }
    }
    let (_, _, nnz) = size.ok_or_else(|| parse_error(path, 1, 1, "missing size line"))?;
    if seen != nnz {
        return Err(parse_error(path, 1, 1, format!("declared {nnz} entries, found {seen}")));
    }
    Ok(coo.expect("size line seen").to_csc())
}

/// Writes coordinate/general form; the field is complex when any stored
/// entry has a nonzero imaginary part.
pub fn write_matrix(path: &Path, m: &CscMatrix) -> Result<()> {
    let entries = m.triplets();
    let complex = entries.iter().any(|(_, _, v)| v.im != 0.0);
    let field = if complex { "complex" } else { "real" };
    let mut out = String::new();
    let _ = writeln!(out, "%%MatrixMarket matrix coordinate {field} general");
    let _ = writeln!(out, "{} {} {}", m.n_rows(), m.n_cols(), entries.len());
    for (i, j, v) in entries {
        if complex {
            let _ = writeln!(out, "{} {} {:.16e} {:.16e}", i + 1, j + 1, v.re, v.im);
        } else {
            let _ = writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v.re);
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display(), e))
}
