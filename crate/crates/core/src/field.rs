//! Exact arithmetic and linear algebra over prime fields GF(q).
//!
//! Residues are stored as `u32` and multiplied in `u64`, which is why the
//! modulus is capped at `2^31 - 1`. Matrices keep their field alongside a
//! flat row-major residue buffer; every operation is exact.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field size {0} is outside the supported range 2..=2147483647")]
    ModulusOutOfRange(u64),
    #[error("value {value} is not a residue modulo {modulus}")]
    NotAResidue { value: u64, modulus: u32 },
    #[error("division by zero")]
    DivideByZero,
    #[error("operands belong to different fields (GF({0}) vs GF({1}))")]
    FieldMismatch(u32, u32),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("linear system has no solution")]
    NoSolution,
    #[error("linear system has more than one solution")]
    NotUnique,
}

/// A prime field GF(q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct PrimeField {
    q: u32,
}

/// Builds GF(q), rejecting composite or out-of-range moduli.
pub fn make_field(q: u64) -> Result<PrimeField, FieldError> {
    PrimeField::new(q)
}

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    if q < 4 {
        return true;
    }
    if q.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl PrimeField {
    pub const MAX_MODULUS: u32 = (1 << 31) - 1;

    pub fn new(q: u64) -> Result<Self, FieldError> {
        if !(2..=Self::MAX_MODULUS as u64).contains(&q) {
            return Err(FieldError::ModulusOutOfRange(q));
        }
        if !is_prime(q) {
            return Err(FieldError::NotPrime(q));
        }
        Ok(Self { q: q as u32 })
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.q
    }

    /// Checked conversion of a residue into an element of this field.
    pub fn element(self, value: u64) -> Result<FieldElement, FieldError> {
        if value >= self.q as u64 {
            return Err(FieldError::NotAResidue {
                value,
                modulus: self.q,
            });
        }
        Ok(FieldElement {
            value: value as u32,
            field: self,
        })
    }

    /// Reduces an arbitrary integer into the field.
    pub fn reduce(self, value: i64) -> FieldElement {
        FieldElement {
            value: value.rem_euclid(self.q as i64) as u32,
            field: self,
        }
    }

    pub fn zero(self) -> FieldElement {
        FieldElement {
            value: 0,
            field: self,
        }
    }

    pub fn one(self) -> FieldElement {
        FieldElement {
            value: 1,
            field: self,
        }
    }

    // Raw residue arithmetic. Callers guarantee both operands are < q.

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        let q = self.q as u64;
        (if s >= q { s - q } else { s }) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            (a as u64 + self.q as u64 - b as u64) as u32
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.q as u64) as u32
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    pub fn pow(self, base: u32, mut exp: u64) -> u32 {
        let q = self.q as u64;
        let mut acc = 1u64 % q;
        let mut b = base as u64 % q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * b % q;
            }
            b = b * b % q;
            exp >>= 1;
        }
        acc as u32
    }

    /// Multiplicative inverse by Fermat's little theorem.
    pub fn inv(self, a: u32) -> Option<u32> {
        if a.is_multiple_of(self.q) {
            None
        } else {
            Some(self.pow(a, self.q as u64 - 2))
        }
    }

    pub fn is_valid(self, value: u32) -> bool {
        value < self.q
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

/// An element of a specific prime field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    field: PrimeField,
}

impl FieldElement {
    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn field(self) -> PrimeField {
        self.field
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: Self) -> Result<PrimeField, FieldError> {
        if self.field != other.field {
            Err(FieldError::FieldMismatch(self.field.q, other.field.q))
        } else {
            Ok(self.field)
        }
    }

    pub fn try_add(self, other: Self) -> Result<Self, FieldError> {
        let f = self.same_field(other)?;
        Ok(Self {
            value: f.add(self.value, other.value),
            field: f,
        })
    }

    pub fn try_sub(self, other: Self) -> Result<Self, FieldError> {
        let f = self.same_field(other)?;
        Ok(Self {
            value: f.sub(self.value, other.value),
            field: f,
        })
    }

    pub fn try_mul(self, other: Self) -> Result<Self, FieldError> {
        let f = self.same_field(other)?;
        Ok(Self {
            value: f.mul(self.value, other.value),
            field: f,
        })
    }

    pub fn inv(self) -> Result<Self, FieldError> {
        let value = self.field.inv(self.value).ok_or(FieldError::DivideByZero)?;
        Ok(Self {
            value,
            field: self.field,
        })
    }
}

impl std::ops::Neg for FieldElement {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            value: self.field.neg(self.value),
            field: self.field,
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// A vector of residues tagged with its field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldVector {
    field: PrimeField,
    values: Vec<u32>,
}

impl FieldVector {
    pub fn new(field: PrimeField, values: Vec<u32>) -> Result<Self, FieldError> {
        if let Some(&bad) = values.iter().find(|&&v| !field.is_valid(v)) {
            return Err(FieldError::NotAResidue {
                value: bad as u64,
                modulus: field.q,
            });
        }
        Ok(Self { field, values })
    }

    pub fn from_elements(field: PrimeField, elems: &[FieldElement]) -> Result<Self, FieldError> {
        let mut values = Vec::with_capacity(elems.len());
        for e in elems {
            if e.field != field {
                return Err(FieldError::FieldMismatch(field.q, e.field.q));
            }
            values.push(e.value);
        }
        Ok(Self { field, values })
    }

    pub fn zeros(field: PrimeField, len: usize) -> Self {
        Self {
            field,
            values: vec![0; len],
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn get(&self, i: usize) -> FieldElement {
        FieldElement {
            value: self.values[i],
            field: self.field,
        }
    }

    pub fn set(&mut self, i: usize, value: FieldElement) -> Result<(), FieldError> {
        if value.field != self.field {
            return Err(FieldError::FieldMismatch(self.field.q, value.field.q));
        }
        self.values[i] = value.value;
        Ok(())
    }

    pub fn weight(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0).count()
    }

    pub fn hamming_distance(&self, other: &FieldVector) -> usize {
        self.values
            .iter()
            .zip(&other.values)
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// Dense `rows x cols` matrix over GF(q), row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl Matrix {
    pub fn new(field: PrimeField, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self, FieldError> {
        if data.len() != rows * cols {
            return Err(FieldError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&v| !field.is_valid(v)) {
            return Err(FieldError::NotAResidue {
                value: bad as u64,
                modulus: field.q,
            });
        }
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn from_rows(field: PrimeField, rows: &[Vec<u32>]) -> Result<Self, FieldError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(FieldError::DimensionMismatch("ragged rows".into()));
        }
        Self::new(field, rows.len(), cols, rows.concat())
    }

    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, size: usize) -> Self {
        let mut m = Self::zeros(field, size, size);
        for i in 0..size {
            m.data[i * size + i] = 1;
        }
        m
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn element(&self, r: usize, c: usize) -> FieldElement {
        FieldElement {
            value: self.get(r, c),
            field: self.field,
        }
    }

    pub fn set(&mut self, r: usize, c: usize, value: u32) -> Result<(), FieldError> {
        if !self.field.is_valid(value) {
            return Err(FieldError::NotAResidue {
                value: value as u64,
                modulus: self.field.q,
            });
        }
        self.data[r * self.cols + c] = value;
        Ok(())
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c);
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self {
            field: self.field,
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            data.extend(cols.iter().map(|&c| self.get(r, c)));
        }
        Self {
            field: self.field,
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }

    /// Row vector times matrix: `v · M`.
    pub fn left_mul(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.rows, "vector length must equal row count");
        let f = self.field;
        let mut out = vec![0u32; self.cols];
        for (r, &coef) in v.iter().enumerate() {
            if coef == 0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o = f.add(*o, f.mul(coef, a));
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        let mut work = self.data.clone();
        row_reduce(self.field, &mut work, self.rows, self.cols, self.cols)
    }

    /// Rank of the submatrix formed by `cols`, reusing `scratch` for the elimination.
    pub fn rank_of_columns(&self, cols: &[usize], scratch: &mut Vec<u32>) -> usize {
        scratch.clear();
        for r in 0..self.rows {
            let row = self.row(r);
            scratch.extend(cols.iter().map(|&c| row[c]));
        }
        row_reduce(self.field, scratch, self.rows, cols.len(), cols.len())
    }
}

/// In-place reduced row echelon form of a `rows x cols` buffer, pivoting only
/// in the first `pivot_cols` columns. Returns the number of pivots.
fn row_reduce(f: PrimeField, m: &mut [u32], rows: usize, cols: usize, pivot_cols: usize) -> usize {
    let mut rank = 0;
    for c in 0..pivot_cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| m[r * cols + c] != 0) else {
            continue;
        };
        if p != rank {
            for j in 0..cols {
                m.swap(p * cols + j, rank * cols + j);
            }
        }
        let inv = f.inv(m[rank * cols + c]).expect("pivot is nonzero");
        for j in c..cols {
            m[rank * cols + j] = f.mul(m[rank * cols + j], inv);
        }
        for r in 0..rows {
            if r == rank {
                continue;
            }
            let factor = m[r * cols + c];
            if factor == 0 {
                continue;
            }
            for j in c..cols {
                let v = f.mul(factor, m[rank * cols + j]);
                m[r * cols + j] = f.sub(m[r * cols + j], v);
            }
        }
        rank += 1;
    }
    rank
}

/// Solves `A x = b` when the solution exists and is unique.
pub fn solve_unique(a: &Matrix, b: &FieldVector) -> Result<FieldVector, FieldError> {
    if b.field() != a.field {
        return Err(FieldError::FieldMismatch(a.field.q, b.field().q));
    }
    if b.len() != a.rows {
        return Err(FieldError::DimensionMismatch(format!(
            "right-hand side has {} entries, system has {} equations",
            b.len(),
            a.rows
        )));
    }
    let width = a.cols + 1;
    let mut aug = Vec::with_capacity(a.rows * width);
    for r in 0..a.rows {
        aug.extend_from_slice(a.row(r));
        aug.push(b.values()[r]);
    }
    let rank = row_reduce(a.field, &mut aug, a.rows, width, a.cols);
    // A nonzero right-hand side in a zero row means inconsistency.
    if (rank..a.rows).any(|r| aug[r * width + a.cols] != 0) {
        return Err(FieldError::NoSolution);
    }
    if rank < a.cols {
        return Err(FieldError::NotUnique);
    }
    // Full column rank: the first `cols` rows hold the identity.
    let x = (0..a.cols).map(|r| aug[r * width + a.cols]).collect();
    FieldVector::new(a.field, x)
}
