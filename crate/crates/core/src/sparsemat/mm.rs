//! Matrix Market coordinate files.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::SparseMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Reads a coordinate Matrix Market stream (real, integer or pattern;
/// general or symmetric). Symmetric files are unfolded, pattern entries get
/// value 1, and duplicate coordinates are rejected.
pub fn read_matrix_market<R: Read>(source: R) -> Result<SparseMatrix> {
    let reader = BufReader::new(source);
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (lineno, header) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return Err(parse_err(1, "empty input")),
    };
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(lineno, "expected `%%MatrixMarket matrix <format> <field> <symmetry>`"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(lineno, format!("unsupported format `{}`", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(parse_err(lineno, format!("unsupported field `{other}`"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(parse_err(lineno, format!("unsupported symmetry `{other}`"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut source_line: Vec<usize> = Vec::new();
    let mut entries = 0usize;
    let mut last_line = lineno;
    for (lineno, line) in lines {
        last_line = lineno;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        let Some((n_rows, n_cols, nnz)) = size else {
            if parts.len() != 3 {
                return Err(parse_err(lineno, "size line must hold `rows cols entries`"));
            }
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| parse_err(lineno, format!("bad size value `{s}`")))
            };
            let dims = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
            if symmetry == Symmetry::Symmetric && dims.0 != dims.1 {
                return Err(parse_err(lineno, "symmetric matrix must be square"));
            }
            triplets.reserve(dims.2 * if symmetry == Symmetry::Symmetric { 2 } else { 1 });
            size = Some(dims);
            continue;
        };
        if entries == nnz {
            return Err(parse_err(lineno, format!("more than the declared {nnz} entries")));
        }
        let want = if field == Field::Pattern { 2 } else { 3 };
        if parts.len() != want {
            return Err(parse_err(lineno, format!("expected {want} fields, found {}", parts.len())));
        }
        let index = |s: &str, bound: usize| -> Result<usize> {
            let v: usize = s
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad index `{s}`")))?;
            if v == 0 || v > bound {
                return Err(parse_err(lineno, format!("index {v} out of range 1..={bound}")));
            }
            Ok(v - 1)
        };
        let i = index(parts[0], n_rows)?;
        let j = index(parts[1], n_cols)?;
        let v = match field {
            Field::Pattern => 1.0,
            Field::Real | Field::Integer => parts[2]
                .parse::<f64>()
                .map_err(|_| parse_err(lineno, format!("bad value `{}`", parts[2])))?,
        };
        if symmetry == Symmetry::Symmetric && j > i {
            return Err(parse_err(lineno, "symmetric file stores an upper-triangle entry"));
        }
        entries += 1;
        triplets.push((i, j, v));
        source_line.push(lineno);
        if symmetry == Symmetry::Symmetric && i != j {
            triplets.push((j, i, v));
            source_line.push(lineno);
        }
    }
    let Some((n_rows, n_cols, nnz)) = size else {
        return Err(parse_err(last_line, "missing size line"));
    };
    if entries != nnz {
        return Err(parse_err(last_line, format!("declared {nnz} entries but found {entries}")));
    }

    let mut order: Vec<usize> = (0..triplets.len()).collect();
    order.sort_by_key(|&p| (triplets[p].0, triplets[p].1));
    for w in order.windows(2) {
        let (a, b) = (triplets[w[0]], triplets[w[1]]);
        if (a.0, a.1) == (b.0, b.1) {
            let line = source_line[w[0]].max(source_line[w[1]]);
            return Err(parse_err(
                line,
                format!("duplicate entry ({}, {})", a.0 + 1, a.1 + 1),
            ));
        }
    }
    SparseMatrix::from_triplets(n_rows, n_cols, &triplets)
}

pub fn read_matrix_market_file(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    read_matrix_market(File::open(path)?)
}

/// Writes `a` as a general real coordinate file with 17 significant digits,
/// which round-trips every double exactly.
pub fn write_matrix_market<W: Write>(a: &SparseMatrix, mut out: W) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz())?;
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}
