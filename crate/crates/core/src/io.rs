//! Plain-text file formats.
//!
//! Triplet matrix file (0-indexed, `#` starts a comment):
//!
//! ```text
//! n nnz_offdiag
//! i diag_value [b_value]     # n lines
//! i j value                  # nnz_offdiag lines
//! ```
//!
//! The optional third column of a diagonal line carries `b_i` (0 when
//! absent). Edge lists hold `u v [w]` per line with `w` defaulting to 1.
//! Opinion files hold one real per line.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::system::{SparseDDSystem, Triplets};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse::<T>()
        .map_err(|_| Error::Parse { line, msg: format!("bad {what} {tok:?}") })
}

fn parse_real(tok: &str, line: usize) -> Result<f64> {
    let x: f64 = parse_num(tok, line, "real")?;
    if !x.is_finite() {
        return Err(Error::Parse { line, msg: format!("non-finite value {tok:?}") });
    }
    Ok(x)
}

pub fn parse_triplets(text: &str) -> Result<Triplets> {
    let mut lines = data_lines(text);
    let (hl, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty matrix file".into() })?;
    if header.len() != 2 {
        return Err(Error::Parse { line: hl, msg: "expected header \"n nnz_offdiag\"".into() });
    }
    let n: usize = parse_num(header[0], hl, "dimension")?;
    let nnz: usize = parse_num(header[1], hl, "entry count")?;

    let mut diag = Vec::with_capacity(n);
    let mut b = vec![0.0; n];
    for _ in 0..n {
        let (ln, f) = lines.next().ok_or(Error::Parse { line: hl, msg: "missing diagonal lines".into() })?;
        if f.len() != 2 && f.len() != 3 {
            return Err(Error::Parse { line: ln, msg: "expected \"i diag_value [b_value]\"".into() });
        }
        let i: usize = parse_num(f[0], ln, "index")?;
        if i >= n {
            return Err(Error::Parse { line: ln, msg: format!("index {i} out of range") });
        }
        diag.push((i, parse_real(f[1], ln)?));
        if f.len() == 3 {
            b[i] = parse_real(f[2], ln)?;
        }
    }
    let mut offdiag = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let (ln, f) = lines.next().ok_or(Error::Parse { line: hl, msg: "missing off-diagonal lines".into() })?;
        if f.len() != 3 {
            return Err(Error::Parse { line: ln, msg: "expected \"i j value\"".into() });
        }
        offdiag.push((parse_num(f[0], ln, "index")?, parse_num(f[1], ln, "index")?, parse_real(f[2], ln)?));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse { line: ln, msg: "trailing data after declared entries".into() });
    }
    Ok(Triplets { n, diag, offdiag, b })
}

/// Parses a triplet file and builds the system. Construction errors are
/// reported as parse errors on line 0.
pub fn parse_system(text: &str) -> Result<SparseDDSystem> {
    let t = parse_triplets(text)?;
    SparseDDSystem::from_parts(&t).map_err(|e| match e {
        Error::Parse { .. } => e,
        other => Error::Parse { line: 0, msg: other.to_string() },
    })
}

pub fn format_system(s: &SparseDDSystem) -> String {
    let t = s.to_triplets();
    let mut out = String::new();
    writeln!(out, "{} {}", t.n, t.offdiag.len()).unwrap();
    for (i, d) in &t.diag {
        writeln!(out, "{i} {d} {}", t.b[*i]).unwrap();
    }
    for (i, j, w) in &t.offdiag {
        writeln!(out, "{i} {j} {w}").unwrap();
    }
    out
}

pub fn parse_edges(text: &str) -> Result<Vec<(usize, usize, f64)>> {
    data_lines(text)
        .map(|(ln, f)| {
            if f.len() != 2 && f.len() != 3 {
                return Err(Error::Parse { line: ln, msg: "expected \"u v [w]\"".into() });
            }
            let w = if f.len() == 3 { parse_real(f[2], ln)? } else { 1.0 };
            Ok((parse_num(f[0], ln, "vertex")?, parse_num(f[1], ln, "vertex")?, w))
        })
        .collect()
}

pub fn format_edges(edges: &[(usize, usize, f64)]) -> String {
    let mut out = String::new();
    for (u, v, w) in edges {
        writeln!(out, "{u} {v} {w}").unwrap();
    }
    out
}

pub fn parse_opinions(text: &str) -> Result<Vec<f64>> {
    data_lines(text)
        .map(|(ln, f)| {
            if f.len() != 1 {
                return Err(Error::Parse { line: ln, msg: "expected one real per line".into() });
            }
            parse_real(f[0], ln)
        })
        .collect()
}

pub fn format_opinions(x: &[f64]) -> String {
    let mut out = String::new();
    for v in x {
        writeln!(out, "{v}").unwrap();
    }
    out
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_system(path: &Path) -> Result<SparseDDSystem> {
    parse_system(&read_to_string(path)?)
}
