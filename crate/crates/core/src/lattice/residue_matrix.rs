use crate::error::{Error, Result};
use crate::ring::{Fq, ResidueField};

/// Dense matrix over the residue field `F_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueMatrix {
    field: ResidueField,
    rows: usize,
    cols: usize,
    data: Vec<Fq>,
}

impl ResidueMatrix {
    pub fn new(field: ResidueField, rows: usize, cols: usize, data: Vec<Fq>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must match shape");
        ResidueMatrix { field, rows, cols, data }
    }

    pub fn zeros(field: &ResidueField, rows: usize, cols: usize) -> Self {
        ResidueMatrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    /// Matrix with entries in the prime field.
    pub fn from_ints(field: &ResidueField, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let data = rows.iter().flat_map(|row| row.iter().map(|&x| field.from_int(x))).collect();
        Self::new(field.clone(), r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Fq {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Fq) {
        self.data[i * self.cols + j] = x;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Fq::is_zero)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let k = &self.field;
        let mut out = Self::zeros(k, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = k.zero();
                for t in 0..self.cols {
                    acc = k.add(&acc, &k.mul(self.get(i, t), other.get(t, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: usize) -> Result<Self> {
        let mut acc = Self::identity(&self.field, self.rows);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn identity(field: &ResidueField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    /// `[self | other]`.
    pub fn hcat(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::Dimension(format!(
                "cannot place {} rows beside {} rows",
                self.rows, other.rows
            )));
        }
        let mut out = Self::zeros(&self.field, self.rows, self.cols + other.cols);
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

    /// Rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let k = &self.field;
        let mut m = self.data.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        for c in 0..cols {
            let Some(piv) = (rank..rows).find(|&r| !m[r * cols + c].is_zero()) else {
                continue;
            };
            for j in 0..cols {
                m.swap(piv * cols + j, rank * cols + j);
            }
            let inv = k.inv(&m[rank * cols + c]).expect("pivot is nonzero");
            for r in 0..rows {
                if r == rank || m[r * cols + c].is_zero() {
                    continue;
                }
                let t = k.mul(&m[r * cols + c], &inv);
                for j in c..cols {
                    let v = k.sub(&m[r * cols + j], &k.mul(&t, &m[rank * cols + j]));
                    m[r * cols + j] = v;
                }
            }
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }
}

/// Graded kernel dimensions `g_j = dim ker N^j - dim ker N^{j-1}`, `j = 1..=e`,
/// of a nilpotent endomorphism `N` with `N^e = 0`.
pub fn kernel_rank_chain(nbar: &ResidueMatrix, e: usize) -> Result<Vec<usize>> {
    if nbar.rows != nbar.cols {
        return Err(Error::Dimension(format!(
            "kernel chain needs a square matrix, got {}x{}",
            nbar.rows, nbar.cols
        )));
    }
    let m = nbar.rows;
    let mut power = ResidueMatrix::identity(&nbar.field, m);
    let mut prev_ker = 0;
    let mut out = Vec::with_capacity(e);
    for _ in 0..e {
        power = power.mul(nbar)?;
        let ker = m - power.rank();
        out.push(ker - prev_ker);
        prev_ker = ker;
    }
    if !power.is_zero() {
        return Err(Error::NotNilpotentAtE(e));
    }
    Ok(out)
}

/// The same chain for the endomorphism induced by `N` on `k^m / span(W)`;
/// `W`'s columns must span an `N`-stable subspace.
pub fn kernel_rank_chain_quotient(nbar: &ResidueMatrix, w: &ResidueMatrix, e: usize) -> Result<Vec<usize>> {
    if nbar.rows != nbar.cols || w.rows != nbar.rows {
        return Err(Error::Dimension(format!(
            "quotient chain needs a square matrix and matching span, got {}x{} and {}x{}",
            nbar.rows, nbar.cols, w.rows, w.cols
        )));
    }
    let m = nbar.rows;
    let rw = w.rank();
    if nbar.mul(w)?.hcat(w)?.rank() != rw {
        return Err(Error::Validation(
            "image of phi mod p is not stable under pi".into(),
        ));
    }
    let mut power = ResidueMatrix::identity(&nbar.field, m);
    let mut prev_ker = 0;
    let mut out = Vec::with_capacity(e);
    for _ in 0..e {
        power = power.mul(nbar)?;
        let ker = m - power.hcat(w)?.rank();
        out.push(ker - prev_ker);
        prev_ker = ker;
    }
    if power.hcat(w)?.rank() != rw {
        return Err(Error::NotNilpotentAtE(e));
    }
    Ok(out)
}
