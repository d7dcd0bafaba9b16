//! Plain-text polytope files.
//!
//! ```text
//! n d
//! x_11 ... x_1n
//! ...
//! x_d1 ... x_dn
//! ```
//!
//! Tokens are separated by exactly one space and every line ends with LF.

use num_bigint::BigInt;

use super::{LatticePolytope, Point};
use crate::error::{Error, Result};

pub fn write_polytope(p: &LatticePolytope) -> String {
    let mut out = format!("{} {}\n", p.dim(), p.vertex_count());
    write_vertex_lines(p, &mut out);
    out
}

pub(crate) fn write_vertex_lines(p: &LatticePolytope, out: &mut String) {
    for v in p.vertices() {
        out.push_str(&join(v));
        out.push('\n');
    }
}

pub(crate) fn join(v: &[BigInt]) -> String {
    v.iter().map(BigInt::to_string).collect::<Vec<_>>().join(" ")
}

/// Splits text into LF-terminated lines, rejecting CR and a missing final LF.
pub(crate) fn split_lines(text: &str) -> Result<Vec<&str>> {
    if text.is_empty() {
        return Err(Error::parse(1, 1, "empty input"));
    }
    let mut lines: Vec<&str> = text.split('\n').collect();
    let last = lines.pop().expect("split yields at least one piece");
    if !last.is_empty() {
        return Err(Error::parse(lines.len() + 1, last.len() + 1, "missing final line feed"));
    }
    for (i, line) in lines.iter().enumerate() {
        if let Some(col) = line.find('\r') {
            return Err(Error::parse(i + 1, col + 1, "carriage return in input"));
        }
    }
    Ok(lines)
}

/// Parses one line of exactly `expected` integers separated by single spaces.
/// `line_no` is 1-based and only used for diagnostics.
pub(crate) fn parse_int_row(line: &str, line_no: usize, expected: usize) -> Result<Vec<BigInt>> {
    let mut out = Vec::with_capacity(expected);
    let mut col = 1;
    if line.is_empty() {
        return Err(Error::parse(line_no, 1, format!("expected {expected} integers, found an empty line")));
    }
    let pieces: Vec<&str> = line.split(' ').collect();
    let last = pieces.len() - 1;
    for (k, tok) in pieces.into_iter().enumerate() {
        if tok.is_empty() {
            return Err(match k {
                0 => Error::parse(line_no, 1, "leading whitespace"),
                k if k == last => Error::parse(line_no, col - 1, "trailing whitespace"),
                _ => Error::parse(line_no, col, "extra whitespace"),
            });
        }
        let valid = {
            let digits = tok.strip_prefix('-').unwrap_or(tok);
            !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        };
        if !valid {
            return Err(Error::parse(line_no, col, format!("invalid integer {tok:?}")));
        }
        if out.len() == expected {
            return Err(Error::parse(line_no, col, format!("expected {expected} integers, found more")));
        }
        out.push(tok.parse::<BigInt>().expect("validated digits"));
        col += tok.len() + 1;
    }
    if out.len() != expected {
        return Err(Error::parse(
            line_no,
            line.len() + 1,
            format!("expected {expected} integers, found {}", out.len()),
        ));
    }
    Ok(out)
}

pub(crate) fn parse_usize(tok: &BigInt, line: usize, column: usize, what: &str) -> Result<usize> {
    usize::try_from(tok).map_err(|_| Error::parse(line, column, format!("{what} must be a nonnegative integer")))
}

/// Parses `d` vertex lines of length `n` starting at `lines[0]` (file line `first_line_no`).
pub(crate) fn parse_vertex_block(lines: &[&str], first_line_no: usize, n: usize, d: usize) -> Result<Vec<Point>> {
    if lines.len() < d {
        return Err(Error::parse(
            first_line_no + lines.len(),
            1,
            format!("expected {d} vertex lines, found {}", lines.len()),
        ));
    }
    lines[..d]
        .iter()
        .enumerate()
        .map(|(k, line)| parse_int_row(line, first_line_no + k, n))
        .collect()
}

pub(crate) fn parse_header(line: &str, line_no: usize) -> Result<(usize, usize)> {
    let h = parse_int_row(line, line_no, 2)?;
    let n = parse_usize(&h[0], line_no, 1, "dimension")?;
    let d = parse_usize(&h[1], line_no, h[0].to_string().len() + 2, "vertex count")?;
    if n == 0 || d == 0 {
        return Err(Error::parse(line_no, 1, "dimension and vertex count must be positive"));
    }
    Ok((n, d))
}

/// Reads a polytope file, certifies its vertices and keeps the file's vertex order.
pub fn parse_polytope(text: &str) -> Result<LatticePolytope> {
    let lines = split_lines(text)?;
    let (n, d) = parse_header(lines[0], 1)?;
    let points = parse_vertex_block(&lines[1..], 2, n, d)?;
    if lines.len() > d + 1 {
        return Err(Error::parse(d + 2, 1, "unexpected trailing content"));
    }
    Ok(LatticePolytope::with_order(points)?)
}
