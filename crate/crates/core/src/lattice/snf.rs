use num_bigint::BigInt;
use num_rational::BigRational;

use super::ModelMatrix;
use crate::error::{Error, Result};
use crate::ring::RingElem;

/// Valuations of the diagonal of a Smith form, nonincreasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementaryDivisors {
    /// `v(a_1) >= v(a_2) >= ...`, in units of `v(p) = 1`.
    pub vals: Vec<BigRational>,
    /// Divisors that could not be told apart from zero at working precision.
    pub rank_deficit: usize,
}

impl ElementaryDivisors {
    /// Sum of the determined divisors.
    pub fn total(&self) -> BigRational {
        self.vals.iter().sum()
    }

    /// Number of divisors of positive valuation.
    pub fn positive(&self) -> usize {
        self.vals.iter().filter(|v| **v > BigRational::from_integer(0.into())).count()
    }
}

fn rat(num: u32, den: u32) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Elementary divisor valuations by pivoting on a global minimum-valuation
/// entry (ties to the lowest `(row, col)`) and Schur-complement elimination.
pub fn smith_valuations(a: &ModelMatrix) -> Result<ElementaryDivisors> {
    let n_ram = a.params().ram_index();
    let mut m = a.clone();
    let (rows, cols) = (m.rows(), m.cols());
    let size = rows.min(cols);
    let mut vals_u = Vec::with_capacity(size);
    for k in 0..size {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if let Some(v) = m.get(i, j).val_u() {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, pi, pj)) = best else {
            break;
        };
        m.swap_rows(k, pi);
        m.swap_cols(k, pj);
        vals_u.push(v);
        let pivot = m.get(k, k).clone();
        for i in k + 1..rows {
            if m.get(i, k).is_zero() {
                continue;
            }
            let t = m.get(i, k).try_div(&pivot).map_err(|e| match e {
                Error::PrecisionExhausted(msg) => Error::precision(format!(
                    "smith pivot at ({pi}, {pj}) of a {rows}x{cols} matrix: {msg}"
                )),
                other => other,
            })?;
            for j in k + 1..cols {
                let x = m.get(i, j) - &(&t * m.get(k, j));
                m.set(i, j, x);
            }
        }
    }
    let rank_deficit = size - vals_u.len();
    let mut vals: Vec<BigRational> = vals_u.into_iter().map(|v| rat(v, n_ram)).collect();
    vals.reverse();
    Ok(ElementaryDivisors { vals, rank_deficit })
}

/// `v(Fitt_i)` for `i = 0..=min(rows, cols)`: the sum of the smallest
/// `min(rows, cols) - i` divisor valuations.
pub fn fitting_valuations(a: &ModelMatrix) -> Result<Vec<BigRational>> {
    let ed = smith_valuations(a)?;
    if ed.rank_deficit > 0 {
        return Err(Error::precision(format!(
            "{} elementary divisor(s) vanish at working precision, Fitt_0 is undetermined",
            ed.rank_deficit
        )));
    }
    let m = ed.vals.len();
    Ok((0..=m).map(|i| ed.vals[i..].iter().sum()).collect())
}

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(a: &ModelMatrix) -> RingElem {
    let n = a.rows();
    let prm = a.params();
    match n {
        0 => RingElem::one(prm),
        1 => a.get(0, 0).clone(),
        _ => {
            let mut acc = RingElem::zero(prm);
            for j in 0..n {
                let keep: Vec<usize> = (0..n).filter(|&c| c != j).collect();
                let minor = a.block(1, 0, n - 1, n).select_cols(&keep);
                let term = a.get(0, j) * &cofactor_det(&minor);
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Independent route to [`fitting_valuations`]: for each `i`, the least
/// valuation among all `(min(rows, cols) - i)`-minors. Limited to 5x5.
pub fn minor_fitting_oracle(a: &ModelMatrix) -> Result<Vec<BigRational>> {
    let (rows, cols) = (a.rows(), a.cols());
    if rows > 5 || cols > 5 {
        return Err(Error::TooLarge { rows, cols });
    }
    let n_ram = a.params().ram_index();
    let m = rows.min(cols);
    let mut out = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let s = m - i;
        if s == 0 {
            out.push(rat(0, 1));
            continue;
        }
        let t = a.transpose();
        let mut best: Option<u32> = None;
        for rs in subsets(rows, s) {
            let sub = t.select_cols(&rs).transpose();
            for cs in subsets(cols, s) {
                if let Some(v) = cofactor_det(&sub.select_cols(&cs)).val_u() {
                    best = Some(best.map_or(v, |b| b.min(v)));
                }
            }
        }
        match best {
            Some(v) => out.push(rat(v, n_ram)),
            None => {
                return Err(Error::precision(format!(
                    "all {s}-minors vanish at working precision"
                )))
            }
        }
    }
    Ok(out)
}
