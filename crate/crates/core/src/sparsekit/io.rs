//! Matrix Market (coordinate) and vector file formats.
//!
//! Text vectors hold one entry per line (`re` or `re im`); `%` starts a
//! comment. Binary vectors are `HSSV`, a field byte (0 real, 1 complex), a
//! little-endian `u64` length, then little-endian `f64` data with complex
//! entries interleaved as (re, im).

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::csr::SparseMatrix;
use super::scalar::{Field, Scalar};

/// A matrix whose field is only known at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMatrix {
    Real(SparseMatrix<f64>),
    Complex(SparseMatrix<Complex64>),
}

impl AnyMatrix {
    pub fn field(&self) -> Field {
        match self {
            AnyMatrix::Real(_) => Field::Real,
            AnyMatrix::Complex(_) => Field::Complex,
        }
    }
}

/// A vector whose field is only known at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyVector {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn read_matrix_market(reader: impl BufRead) -> Result<AnyMatrix> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty Matrix Market file"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "missing %%MatrixMarket matrix header"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format '{}'", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "real" | "integer" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries: Vec<(usize, usize, f64, f64)> = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let nums: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if nums.len() != 3 {
                    return Err(parse_err(lineno, "expected 'rows cols entries'"));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|e| parse_err(lineno, e.to_string()));
                size = Some((p(nums[0])?, p(nums[1])?, p(nums[2])?));
            }
            Some((nr, nc, _)) => {
                let want = if field == Field::Complex { 4 } else { 3 };
                if nums.len() != want {
                    return Err(parse_err(lineno, format!("expected {want} fields")));
                }
                let i: usize = nums[0].parse().map_err(|_| parse_err(lineno, "bad row index"))?;
                let j: usize = nums[1].parse().map_err(|_| parse_err(lineno, "bad column index"))?;
                if i == 0 || j == 0 || i > nr || j > nc {
                    return Err(parse_err(lineno, "index out of range"));
                }
                let re: f64 = nums[2].parse().map_err(|_| parse_err(lineno, "bad value"))?;
                let im: f64 = if want == 4 {
                    nums[3].parse().map_err(|_| parse_err(lineno, "bad value"))?
                } else {
                    0.0
                };
                entries.push((i - 1, j - 1, re, im));
            }
        }
    }
    let (nr, nc, nnz) = size.ok_or_else(|| parse_err(0, "missing size line"))?;
    if entries.len() != nnz {
        return Err(parse_err(
            0,
            format!("size line announces {nnz} entries, found {}", entries.len()),
        ));
    }
    let mut expanded = Vec::with_capacity(entries.len() * 2);
    for (i, j, re, im) in entries {
        expanded.push((i, j, re, im));
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => expanded.push((j, i, re, im)),
                Symmetry::SkewSymmetric => expanded.push((j, i, -re, -im)),
                Symmetry::Hermitian => expanded.push((j, i, re, -im)),
            }
        }
    }
    Ok(match field {
        Field::Real => AnyMatrix::Real(SparseMatrix::from_triplets(
            nr,
            nc,
            expanded.into_iter().map(|(i, j, re, _)| (i, j, re)),
        )?),
        Field::Complex => AnyMatrix::Complex(SparseMatrix::from_triplets(
            nr,
            nc,
            expanded
                .into_iter()
                .map(|(i, j, re, im)| (i, j, Complex64::new(re, im))),
        )?),
    })
}

/// Writes a general coordinate Matrix Market file, one stored entry per line.
pub fn write_matrix_market<T: Scalar>(a: &SparseMatrix<T>, mut w: impl Write) -> Result<()> {
    let field = match T::FIELD {
        Field::Real => "real",
        Field::Complex => "complex",
    };
    writeln!(w, "%%MatrixMarket matrix coordinate {field} general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        match T::FIELD {
            Field::Real => writeln!(w, "{} {} {:e}", i + 1, j + 1, v.re())?,
            Field::Complex => writeln!(w, "{} {} {:e} {:e}", i + 1, j + 1, v.re(), v.im())?,
        }
    }
    Ok(())
}

pub fn write_vector_text<T: Scalar>(x: &[T], mut w: impl Write) -> Result<()> {
    for v in x {
        match T::FIELD {
            Field::Real => writeln!(w, "{:e}", v.re())?,
            Field::Complex => writeln!(w, "{:e} {:e}", v.re(), v.im())?,
        }
    }
    Ok(())
}

/// Reads a text vector; a line with two numbers makes the whole vector complex.
pub fn read_vector_text(reader: impl BufRead) -> Result<AnyVector> {
    let mut parts = Vec::new();
    let mut complex = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        let nums: Vec<f64> = t
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|_| parse_err(idx + 1, "bad number")))
            .collect::<Result<_>>()?;
        match nums.as_slice() {
            [re] => parts.push((*re, 0.0)),
            [re, im] => {
                complex = true;
                parts.push((*re, *im));
            }
            _ => return Err(parse_err(idx + 1, "expected one or two numbers")),
        }
    }
    Ok(if complex {
        AnyVector::Complex(parts.into_iter().map(|(r, i)| Complex64::new(r, i)).collect())
    } else {
        AnyVector::Real(parts.into_iter().map(|(r, _)| r).collect())
    })
}

const MAGIC: &[u8; 4] = b"HSSV";

pub fn write_vector_binary<T: Scalar>(x: &[T], mut w: impl Write) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[match T::FIELD {
        Field::Real => 0u8,
        Field::Complex => 1u8,
    }])?;
    w.write_all(&(x.len() as u64).to_le_bytes())?;
    for v in x {
        w.write_all(&v.re().to_le_bytes())?;
        if T::FIELD == Field::Complex {
            w.write_all(&v.im().to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_vector_binary(mut r: impl Read) -> Result<AnyVector> {
    let mut head = [0u8; 13];
    r.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(parse_err(0, "bad binary vector magic"));
    }
    let len = u64::from_le_bytes(head[5..13].try_into().unwrap()) as usize;
    let mut next = || -> Result<f64> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    };
    match head[4] {
        0 => Ok(AnyVector::Real((0..len).map(|_| next()).collect::<Result<_>>()?)),
        1 => Ok(AnyVector::Complex(
            (0..len)
                .map(|_| Ok(Complex64::new(next()?, next()?)))
                .collect::<Result<_>>()?,
        )),
        f => Err(parse_err(0, format!("unknown field byte {f}"))),
    }
}
