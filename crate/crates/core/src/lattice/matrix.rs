use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use rand::Rng;

use super::ResidueMatrix;
use crate::error::{Error, Result};
use crate::ring::{ModelRingParams, RingElem};

/// Dense matrix over the model ring, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct ModelMatrix {
    params: Arc<ModelRingParams>,
    rows: usize,
    cols: usize,
    data: Vec<RingElem>,
}

impl ModelMatrix {
    pub fn new(params: &Arc<ModelRingParams>, rows: usize, cols: usize, data: Vec<RingElem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|x| **x.params() != **params) {
            return Err(Error::ParamsMismatch);
        }
        Ok(ModelMatrix { params: Arc::clone(params), rows, cols, data })
    }

    pub fn from_rows(params: &Arc<ModelRingParams>, rows: Vec<Vec<RingElem>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::Dimension(format!(
                "ragged rows: {} and {} entries",
                c,
                bad.len()
            )));
        }
        Self::new(params, r, c, rows.into_iter().flatten().collect())
    }

    /// Matrix of small integers, handy in tests and generators.
    pub fn from_ints(params: &Arc<ModelRingParams>, rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            params,
            rows.iter()
                .map(|row| row.iter().map(|&c| RingElem::from_int(params, c)).collect())
                .collect(),
        )
    }

    pub fn zeros(params: &Arc<ModelRingParams>, rows: usize, cols: usize) -> Self {
        ModelMatrix {
            params: Arc::clone(params),
            rows,
            cols,
            data: vec![RingElem::zero(params); rows * cols],
        }
    }

    pub fn identity(params: &Arc<ModelRingParams>, n: usize) -> Self {
        Self::scalar(params, n, &RingElem::one(params))
    }

    pub fn scalar(params: &Arc<ModelRingParams>, n: usize, x: &RingElem) -> Self {
        let mut m = Self::zeros(params, n, n);
        for i in 0..n {
            m.set(i, i, x.clone());
        }
        m
    }

    pub fn diag(params: &Arc<ModelRingParams>, entries: &[RingElem]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(params, n, n);
        for (i, x) in entries.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    /// Uniformly random entries of valuation at least `min_val_u`.
    pub fn random<R: Rng + ?Sized>(
        params: &Arc<ModelRingParams>,
        rows: usize,
        cols: usize,
        rng: &mut R,
        min_val_u: u32,
    ) -> Self {
        let data = (0..rows * cols)
            .map(|_| RingElem::random(params, rng, min_val_u))
            .collect();
        ModelMatrix { params: Arc::clone(params), rows, cols, data }
    }

    pub fn params(&self) -> &Arc<ModelRingParams> {
        &self.params
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &RingElem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: RingElem) {
        self.data[i * self.cols + j] = x;
    }

    pub fn entries(&self) -> &[RingElem] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[RingElem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// `row[dst] -= t * row[src]`.
    pub fn row_axpy(&mut self, dst: usize, t: &RingElem, src: usize) {
        for j in 0..self.cols {
            let v = self.get(dst, j) - &(t * self.get(src, j));
            self.set(dst, j, v);
        }
    }

    /// `col[dst] -= t * col[src]`.
    pub fn col_axpy(&mut self, dst: usize, t: &RingElem, src: usize) {
        for i in 0..self.rows {
            let v = self.get(i, dst) - &(t * self.get(i, src));
            self.set(i, dst, v);
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.params != other.params {
            return Err(Error::ParamsMismatch);
        }
        let mut out = Self::zeros(&self.params, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = RingElem::zero(&self.params);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if a.is_zero() && a.prec() == self.params.max_prec() {
                        continue;
                    }
                    acc = &acc + &(a * b);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&RingElem, &RingElem) -> RingElem) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Dimension(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.params != other.params {
            return Err(Error::ParamsMismatch);
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect();
        Ok(ModelMatrix { params: Arc::clone(&self.params), rows: self.rows, cols: self.cols, data })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, x: &RingElem) -> Self {
        self.map(|a| a * x)
    }

    pub fn map(&self, f: impl Fn(&RingElem) -> RingElem) -> Self {
        ModelMatrix {
            params: Arc::clone(&self.params),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(&self.params, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// `[self | other]`.
    pub fn hcat(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::Dimension(format!(
                "cannot place {} rows beside {} rows",
                self.rows, other.rows
            )));
        }
        let mut out = Self::zeros(&self.params, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        Ok(out)
    }

    /// The `nr x nc` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        let mut out = Self::zeros(&self.params, nr, nc);
        for i in 0..nr {
            for j in 0..nc {
                out.set(i, j, self.get(r0 + i, c0 + j).clone());
            }
        }
        out
    }

    /// Columns with the given indices, in order.
    pub fn select_cols(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(&self.params, self.rows, idx.len());
        for i in 0..self.rows {
            for (k, &j) in idx.iter().enumerate() {
                out.set(i, k, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn frobenius(&self) -> Self {
        self.map(RingElem::frobenius)
    }

    pub fn frobenius_pow(&self, k: usize) -> Self {
        self.map(|x| x.frobenius_pow(k))
    }

    pub fn is_frobenius_fixed(&self) -> bool {
        self.data.iter().all(RingElem::is_frobenius_fixed)
    }

    /// Every entry indistinguishable from zero.
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(RingElem::is_zero)
    }

    pub fn min_prec(&self) -> u32 {
        self.data.iter().map(RingElem::prec).min().unwrap_or(self.params.max_prec())
    }

    /// Entrywise reduction to the residue field.
    pub fn residue(&self) -> ResidueMatrix {
        ResidueMatrix::new(
            self.params.residue_field().clone(),
            self.rows,
            self.cols,
            self.data.iter().map(RingElem::residue).collect(),
        )
    }
}

impl Mul<&ModelMatrix> for &ModelMatrix {
    type Output = ModelMatrix;
    fn mul(self, rhs: &ModelMatrix) -> ModelMatrix {
        self.try_mul(rhs).expect("incompatible matrices")
    }
}

impl Add<&ModelMatrix> for &ModelMatrix {
    type Output = ModelMatrix;
    fn add(self, rhs: &ModelMatrix) -> ModelMatrix {
        self.try_add(rhs).expect("incompatible matrices")
    }
}

impl Sub<&ModelMatrix> for &ModelMatrix {
    type Output = ModelMatrix;
    fn sub(self, rhs: &ModelMatrix) -> ModelMatrix {
        self.try_sub(rhs).expect("incompatible matrices")
    }
}

impl fmt::Debug for ModelMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ModelMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join("; "))?;
        }
        write!(f, "]")
    }
}
