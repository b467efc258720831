//! Dense row-major complex matrix and its text dump format.
//!
//! Dump layout (UTF-8, one record per line):
//!
//! ```text
//! # ptspectra matrix v1
//! dim = 4
//! potential = ahmed_cubic
//! g = 2
//! n = 4
//! <re> <im> <re> <im> ...        (one line per row, 2·dim numbers)
//! ```
//!
//! `g` is written as `none` for potentials without a coupling. Numbers use
//! the shortest round-trip decimal form, so dumps reload bit-exactly.

use std::io::{BufRead, Write};
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DUMP_MAGIC: &str = "# ptspectra matrix v1";

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds from row-major entries; fails unless `entries.len() == dim²`
    /// and every entry is finite.
    pub fn from_row_major(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "{} entries do not form a non-empty {dim}×{dim} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(ComplexMatrix { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput("rows are not square".into()));
        }
        Self::from_row_major(dim, rows.concat())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let src = other.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn write_dump<W: Write>(&self, mut w: W, header: &DumpHeader) -> Result<()> {
        writeln!(w, "{DUMP_MAGIC}")?;
        writeln!(w, "dim = {}", self.dim)?;
        writeln!(w, "potential = {}", header.potential)?;
        match header.g {
            Some(g) => writeln!(w, "g = {g:?}")?,
            None => writeln!(w, "g = none")?,
        }
        writeln!(w, "n = {}", header.basis_size)?;
        for i in 0..self.dim {
            let line: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:?} {:?}", z.re, z.im))
                .collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(r: R) -> Result<(ComplexMatrix, DumpHeader)> {
        let mut lines = r.lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .transpose()?
                .ok_or_else(|| Error::Dump(format!("missing {what}")))
        };
        if next("magic line")?.trim() != DUMP_MAGIC {
            return Err(Error::Dump("bad magic line".into()));
        }
        let field = |line: String, key: &str| -> Result<String> {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Dump(format!("expected `{key} = ...`")))?;
            if k.trim() != key {
                return Err(Error::Dump(format!("expected key `{key}`, got `{}`", k.trim())));
            }
            Ok(v.trim().to_string())
        };
        let parse_usize = |s: String| -> Result<usize> {
            s.parse().map_err(|_| Error::Dump(format!("bad integer `{s}`")))
        };
        let dim = parse_usize(field(next("dim")?, "dim")?)?;
        let potential = field(next("potential")?, "potential")?;
        let g = match field(next("g")?, "g")?.as_str() {
            "none" => None,
            s => Some(s.parse().map_err(|_| Error::Dump(format!("bad coupling `{s}`")))?),
        };
        let basis_size = parse_usize(field(next("n")?, "n")?)?;
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            let line = next("matrix row")?;
            let nums: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Dump(format!("row {i}: bad number `{t}`"))))
                .collect::<Result<_>>()?;
            if nums.len() != 2 * dim {
                return Err(Error::Dump(format!("row {i} has {} numbers", nums.len())));
            }
            entries.extend(nums.chunks(2).map(|c| Complex64::new(c[0], c[1])));
        }
        let m = ComplexMatrix::from_row_major(dim, entries).map_err(|e| Error::Dump(e.to_string()))?;
        Ok((
            m,
            DumpHeader {
                potential,
                g,
                basis_size,
            },
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DumpHeader {
    pub potential: String,
    pub g: Option<f64>,
    pub basis_size: usize,
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}
