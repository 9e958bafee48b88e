//! JSON file formats for matrix polynomials and pencils.
//!
//! A polynomial file is `{"n": n, "d": d, "coeffs": [A0, ..., Ad]}` where each
//! `Ai` is a list of `n` rows, each row a list of `n` entries `[re, im]`.
//! A pencil file is `{"N": N, "P0": ..., "P1": ...}` with `N × N` matrices in
//! the same layout. Unknown fields, missing fields and ragged rows are errors.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use pencilkit_core::{Matrix, MatrixPolynomial, Pencil, C64};

pub type Rows = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialFile {
    pub n: usize,
    pub d: usize,
    pub coeffs: Vec<Rows>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PencilFile {
    #[serde(rename = "N")]
    pub size: usize,
    #[serde(rename = "P0")]
    pub p0: Rows,
    #[serde(rename = "P1")]
    pub p1: Rows,
}

pub fn matrix_to_rows(m: &Matrix) -> Rows {
    (0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn rows_to_matrix(rows: &Rows, n: usize, what: &str) -> Result<Matrix> {
    if rows.len() != n {
        bail!("{what}: expected {n} rows, found {}", rows.len());
    }
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            bail!("{what}: row {i} has {} entries, expected {n}", row.len());
        }
        for e in row {
            if !(e[0].is_finite() && e[1].is_finite()) {
                bail!("{what}: row {i} has a non-finite entry");
            }
            data.push(C64::new(e[0], e[1]));
        }
    }
    Ok(Matrix::from_row_major(n, n, data))
}

impl PolynomialFile {
    pub fn from_polynomial(a: &MatrixPolynomial) -> Self {
        Self { n: a.n(), d: a.degree(), coeffs: a.coeffs().iter().map(matrix_to_rows).collect() }
    }

    pub fn to_polynomial(&self) -> Result<MatrixPolynomial> {
        if self.n == 0 {
            bail!("n must be positive");
        }
        if self.coeffs.len() != self.d + 1 {
            bail!("d = {} needs {} coefficients, found {}", self.d, self.d + 1, self.coeffs.len());
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, rows)| rows_to_matrix(rows, self.n, &format!("coeffs[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        Ok(MatrixPolynomial::new(coeffs)?)
    }
}

impl PencilFile {
    pub fn from_pencil(p: &Pencil) -> Self {
        Self { size: p.size(), p0: matrix_to_rows(p.p0()), p1: matrix_to_rows(p.p1()) }
    }

    pub fn to_pencil(&self) -> Result<Pencil> {
        if self.size == 0 {
            bail!("N must be positive");
        }
        let p0 = rows_to_matrix(&self.p0, self.size, "P0")?;
        let p1 = rows_to_matrix(&self.p1, self.size, "P1")?;
        Ok(Pencil::new(p0, p1)?)
    }
}

pub fn parse_polynomial(text: &str) -> Result<MatrixPolynomial> {
    let f: PolynomialFile = serde_json::from_str(text).context("malformed polynomial file")?;
    f.to_polynomial()
}

pub fn parse_pencil(text: &str) -> Result<Pencil> {
    let f: PencilFile = serde_json::from_str(text).context("malformed pencil file")?;
    f.to_pencil()
}

/// Either kind of input file, told apart by its keys.
#[derive(Clone, Debug)]
pub enum Problem {
    Polynomial(MatrixPolynomial),
    Pencil(Pencil),
}

pub fn parse_problem(text: &str) -> Result<Problem> {
    let v: serde_json::Value = serde_json::from_str(text).context("input is not JSON")?;
    if v.get("N").is_some() {
        Ok(Problem::Pencil(parse_pencil(text)?))
    } else if v.get("n").is_some() {
        Ok(Problem::Polynomial(parse_polynomial(text)?))
    } else {
        bail!("input has neither `n` (polynomial) nor `N` (pencil)")
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_polynomial(path: &Path) -> Result<MatrixPolynomial> {
    parse_polynomial(&read(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn read_pencil(path: &Path) -> Result<Pencil> {
    parse_pencil(&read(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn read_problem(path: &Path) -> Result<Problem> {
    parse_problem(&read(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn write_polynomial(path: &Path, a: &MatrixPolynomial) -> Result<()> {
    write_json(path, &PolynomialFile::from_polynomial(a))
}

pub fn write_pencil(path: &Path, p: &Pencil) -> Result<()> {
    write_json(path, &PencilFile::from_pencil(p))
}
