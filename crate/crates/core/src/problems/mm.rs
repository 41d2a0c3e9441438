//! Matrix Market coordinate files with symmetric or Hermitian storage.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{EigenError, Result};
use crate::field::Field;

use super::sparse::SparseHermitian;

/// A matrix read from disk; the field follows the file header.
#[derive(Clone, Debug, PartialEq)]
pub enum MatrixMarket {
    Real(SparseHermitian<f64>),
    Complex(SparseHermitian<Complex64>),
}

impl MatrixMarket {
    pub fn n(&self) -> usize {
        match self {
            MatrixMarket::Real(a) => a.n(),
            MatrixMarket::Complex(a) => a.n(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ValueKind {
    Real,
    Complex,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<MatrixMarket> {
    let file = File::open(path)?;
    parse_matrix_market(BufReader::new(file))
}

/// Parses a coordinate file. Only the `symmetric` and `hermitian`
/// qualifiers are accepted; `complex symmetric` is rejected because it is
/// not Hermitian.
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<MatrixMarket> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or(EigenError::Parse {
            line: 1,
            message: "empty file".into(),
        })?;
    let kind = parse_header(&header?)?;

    let mut size: Option<(usize, usize)> = None;
    let mut real = Vec::new();
    let mut complex = Vec::new();
    let mut last_line = 1;
    for (line_no, line) in lines {
        let line = line?;
        last_line = line_no;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let perr = |message: String| EigenError::Parse { line: line_no, message };
        let Some((n, nnz)) = size else {
            if fields.len() != 3 {
                return Err(perr(format!("expected size line 'rows cols entries', found '{trimmed}'")));
            }
            let nums: Vec<usize> = fields
                .iter()
                .map(|f| f.parse::<usize>().map_err(|e| perr(format!("bad size field '{f}': {e}"))))
                .collect::<Result<_>>()?;
            if nums[0] != nums[1] {
                return Err(EigenError::UnsupportedFormat(format!(
                    "matrix is {}x{}, not square",
                    nums[0], nums[1]
                )));
            }
            size = Some((nums[0], nums[2]));
            continue;
        };
        if real.len() + complex.len() == nnz {
            return Err(perr(format!("more than the declared {nnz} entries")));
        }
        let expected = if kind == ValueKind::Real { 3 } else { 4 };
        if fields.len() != expected {
            return Err(perr(format!("expected {expected} fields, found {}", fields.len())));
        }
        let index = |f: &str| -> Result<usize> {
            let v = f.parse::<usize>().map_err(|e| perr(format!("bad index '{f}': {e}")))?;
            if v == 0 || v > n {
                return Err(perr(format!("index {v} outside 1..={n}")));
            }
            Ok(v - 1)
        };
        let value = |f: &str| -> Result<f64> {
            let v = f.parse::<f64>().map_err(|e| perr(format!("bad value '{f}': {e}")))?;
            if !v.is_finite() {
                return Err(perr(format!("non-finite value '{f}'")));
            }
            Ok(v)
        };
        let (i, j) = (index(fields[0])?, index(fields[1])?);
        match kind {
            ValueKind::Real => real.push((i, j, value(fields[2])?)),
            ValueKind::Complex => {
                let (re, im) = (value(fields[2])?, value(fields[3])?);
                if i == j && im != 0.0 {
                    return Err(perr(format!("diagonal entry ({}, {}) has nonzero imaginary part", i + 1, j + 1)));
                }
                complex.push((i, j, Complex64::new(re, im)));
            }
        }
    }
    let Some((n, nnz)) = size else {
        return Err(EigenError::Parse {
            line: last_line,
            message: "missing size line".into(),
        });
    };
    let found = real.len() + complex.len();
    if found != nnz {
        return Err(EigenError::Parse {
            line: last_line,
            message: format!("declared {nnz} entries, found {found}"),
        });
    }
    Ok(match kind {
        ValueKind::Real => MatrixMarket::Real(SparseHermitian::from_triangle(n, real)?),
        ValueKind::Complex => MatrixMarket::Complex(SparseHermitian::from_triangle(n, complex)?),
    })
}

fn parse_header(line: &str) -> Result<ValueKind> {
    let perr = |message: String| EigenError::Parse { line: 1, message };
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" {
        return Err(perr(format!("not a Matrix Market header: '{line}'")));
    }
    if words[1] != "matrix" {
        return Err(EigenError::UnsupportedFormat(format!("object '{}'", words[1])));
    }
    if words[2] != "coordinate" {
        return Err(EigenError::UnsupportedFormat(format!("storage '{}'", words[2])));
    }
    let kind = match words[3].as_str() {
        "real" | "integer" | "double" => ValueKind::Real,
        "complex" => ValueKind::Complex,
        other => return Err(EigenError::UnsupportedFormat(format!("field '{other}'"))),
    };
    match (kind, words[4].as_str()) {
        (_, "hermitian") | (ValueKind::Real, "symmetric") => Ok(kind),
        (ValueKind::Complex, "symmetric") => Err(EigenError::UnsupportedFormat(
            "complex symmetric matrices are not Hermitian".into(),
        )),
        (_, other) => Err(EigenError::UnsupportedFormat(format!("symmetry '{other}'"))),
    }
}

/// Writes the lower triangle. Values use the shortest representation that
/// parses back to the same `f64`.
pub fn write_matrix_market<T: Field>(path: impl AsRef<Path>, a: &SparseHermitian<T>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_matrix_market_to(&mut out, a)?;
    out.flush()?;
    Ok(())
}

pub fn write_matrix_market_to<T: Field, W: Write>(out: &mut W, a: &SparseHermitian<T>) -> Result<()> {
    let header = if T::IS_COMPLEX { "complex hermitian" } else { "real symmetric" };
    writeln!(out, "%%MatrixMarket matrix coordinate {header}")?;
    let lower: Vec<(usize, usize, T)> = a.lower_triangle().collect();
    writeln!(out, "{} {} {}", a.n(), a.n(), lower.len())?;
    for (i, j, v) in lower {
        let (re, im) = v.parts();
        if T::IS_COMPLEX {
            writeln!(out, "{} {} {re:?} {im:?}", i + 1, j + 1)?;
        } else {
            writeln!(out, "{} {} {re:?}", i + 1, j + 1)?;
        }
    }
    Ok(())
}
