//! Problem and encoding-matrix files.
//!
//! Both are TOML documents with 1-based packet numbers. The canonical form,
//! produced by [`render_problem`] and [`render_matrix`], is:
//!
//! ```text
//! k = 6
//! n = 6
//! q = 3
//! holdings = [
//!   [1, 3, 6],
//!   [2, 3, 4],
//! ]
//! ```
//!
//! and
//!
//! ```text
//! q = 3
//! k = 6
//! n = 6
//! entries = [
//!   [1, 0, 1, 0, 0, 1],
//! ]
//! ```
//!
//! `q` is optional in problem files. `entries` lists the matrix row by row.
//! Lines are `\n`-terminated with no trailing whitespace, and an empty row is
//! written as `[]`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::codec::{CodecError, EncodingMatrix};
use crate::field::{FieldError, Matrix, PrimeField};
use crate::model::{CdeProblem, ProblemError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed document: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("{0}")]
    Shape(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    k: usize,
    n: usize,
    q: Option<u64>,
    holdings: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    q: u64,
    k: usize,
    n: usize,
    entries: Vec<Vec<u64>>,
}

/// A problem file: the instance plus the field it names, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemSpec {
    pub problem: CdeProblem,
    pub field: Option<PrimeField>,
}

pub fn parse_problem(text: &str) -> Result<ProblemSpec, FormatError> {
    let doc: ProblemDoc = toml::from_str(text)?;
    let problem = CdeProblem::from_one_based(doc.k, doc.n, &doc.holdings)?;
    let field = doc.q.map(PrimeField::new).transpose()?;
    Ok(ProblemSpec { problem, field })
}

fn write_rows<T: std::fmt::Display>(out: &mut String, key: &str, rows: impl Iterator<Item = Vec<T>>) {
    let _ = writeln!(out, "{key} = [");
    for row in rows {
        let items: Vec<String> = row.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "  [{}],", items.join(", "));
    }
    out.push_str("]\n");
}

pub fn render_problem(problem: &CdeProblem, field: Option<PrimeField>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "k = {}", problem.k());
    let _ = writeln!(out, "n = {}", problem.n());
    if let Some(f) = field {
        let _ = writeln!(out, "q = {}", f.modulus());
    }
    write_rows(
        &mut out,
        "holdings",
        (0..problem.n()).map(|j| problem.holdings(j).iter().map(|i| i + 1).collect()),
    );
    out
}

pub fn parse_matrix(text: &str) -> Result<Matrix, FormatError> {
    let doc: MatrixDoc = toml::from_str(text)?;
    let field = PrimeField::new(doc.q)?;
    if doc.entries.len() != doc.k || doc.entries.iter().any(|r| r.len() != doc.n) {
        return Err(FormatError::Shape(format!(
            "entries must be {} rows of {} values",
            doc.k, doc.n
        )));
    }
    let mut data = Vec::with_capacity(doc.k * doc.n);
    for &v in doc.entries.iter().flatten() {
        data.push(field.element(v)?.value());
    }
    Ok(Matrix::new(field, doc.k, doc.n, data)?)
}

/// Parses a matrix file and checks it against `problem`'s support.
pub fn parse_encoding(text: &str, problem: &CdeProblem) -> Result<EncodingMatrix, FormatError> {
    Ok(EncodingMatrix::new(problem, parse_matrix(text)?)?)
}

pub fn render_matrix(matrix: &Matrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "q = {}", matrix.field().modulus());
    let _ = writeln!(out, "k = {}", matrix.rows());
    let _ = writeln!(out, "n = {}", matrix.cols());
    write_rows(&mut out, "entries", (0..matrix.rows()).map(|r| matrix.row(r).to_vec()));
    out
}

fn read(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn read_problem(path: &Path) -> Result<ProblemSpec, FormatError> {
    parse_problem(&read(path)?)
}

pub fn read_matrix(path: &Path) -> Result<Matrix, FormatError> {
    parse_matrix(&read(path)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    std::fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}
