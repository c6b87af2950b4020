use super::ModelMatrix;
use crate::error::{Error, Result};
use crate::ring::RingElem;

/// Active entry of least valuation, ties to the lowest `(row, col)`.
fn min_entry(m: &ModelMatrix, rows: &[usize], cols: &[usize]) -> Option<(usize, usize)> {
    let mut best: Option<(u32, usize, usize)> = None;
    for &i in rows {
        for &j in cols {
            if let Some(v) = m.get(i, j).val_u() {
                let better = match best {
                    None => true,
                    Some((bv, bi, bj)) => v < bv || (v == bv && (i, j) < (bi, bj)),
                };
                if better {
                    best = Some((v, i, j));
                }
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

/// Basis (as columns) of `M ∩ ker_K(B)` for a square `B` acting on `M = O^r`.
///
/// Column operations bring `B Q` to a form whose trailing columns vanish at
/// working precision; `Q` is unimodular, so those columns of `Q` span the
/// saturated kernel. Entries below precision are read as zero.
pub fn saturated_kernel(b: &ModelMatrix) -> Result<ModelMatrix> {
    let r = b.rows();
    let c = b.cols();
    let mut m = b.clone();
    let mut q = ModelMatrix::identity(b.params(), c);
    let mut rows: Vec<usize> = (0..r).collect();
    let mut cols: Vec<usize> = (0..c).collect();
    while let Some((i0, j0)) = min_entry(&m, &rows, &cols) {
        let pivot = m.get(i0, j0).clone();
        for &j in &cols {
            if j == j0 || m.get(i0, j).is_zero() {
                continue;
            }
            let t = m.get(i0, j).try_div(&pivot)?;
            m.col_axpy(j, &t, j0);
            q.col_axpy(j, &t, j0);
        }
        rows.retain(|&i| i != i0);
        cols.retain(|&j| j != j0);
    }
    Ok(q.select_cols(&cols))
}

/// Ranks of `M ∩ ker_K(A - tau I)` for each eigenvalue `tau`.
pub fn saturation_ranks(a: &ModelMatrix, eigenvalues: &[RingElem]) -> Result<Vec<usize>> {
    Ok(saturated_eigenlattices(a, eigenvalues)?
        .iter()
        .map(ModelMatrix::cols)
        .collect())
}

/// Bases of the saturated eigenlattices `M ∩ ker_K(A - tau I)`.
pub fn saturated_eigenlattices(a: &ModelMatrix, eigenvalues: &[RingElem]) -> Result<Vec<ModelMatrix>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("{}x{} is not square", a.rows(), a.cols())));
    }
    for (i, x) in eigenvalues.iter().enumerate() {
        for (j, y) in eigenvalues.iter().enumerate().skip(i + 1) {
            if (x - y).val_u().is_none() {
                return Err(Error::EigenvalueCollision(i, j));
            }
        }
    }
    let n = a.rows();
    eigenvalues
        .iter()
        .map(|t| saturated_kernel(&(a - &ModelMatrix::scalar(a.params(), n, t))))
        .collect()
}

/// Basis of the saturation `M ∩ K·span(B)` of the column span of `B`.
///
/// Repeatedly scales the column holding the least-valuation entry so that
/// entry becomes a unit, then clears that row from the remaining columns.
pub fn saturate(b: &ModelMatrix) -> Result<ModelMatrix> {
    let mut m = b.clone();
    let mut rows: Vec<usize> = (0..m.rows()).collect();
    let mut active: Vec<usize> = (0..m.cols()).collect();
    let mut basis = Vec::new();
    while let Some((i0, j0)) = min_entry(&m, &rows, &active) {
        let pivot = m.get(i0, j0).clone();
        for i in 0..m.rows() {
            let x = m.get(i, j0).try_div(&pivot)?;
            m.set(i, j0, x);
        }
        for &j in &active {
            if j == j0 || m.get(i0, j).is_zero() {
                continue;
            }
            let t = m.get(i0, j).clone();
            m.col_axpy(j, &t, j0);
        }
        basis.push(j0);
        rows.retain(|&i| i != i0);
        active.retain(|&j| j != j0);
    }
    Ok(m.select_cols(&basis))
}

/// Integral solution `X` of `A X = B` for square `A` nonsingular over `K`.
///
/// Row reduction with a least-valuation pivot per column, then back
/// substitution; `NotDivisible` means the solution is not integral.
pub fn solve(a: &ModelMatrix, b: &ModelMatrix) -> Result<ModelMatrix> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(Error::Dimension(format!(
            "cannot solve {}x{} against {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = a.rows();
    let mut u = a.clone();
    let mut rhs = b.clone();
    for c in 0..n {
        let mut best: Option<(u32, usize)> = None;
        for i in c..n {
            if let Some(v) = u.get(i, c).val_u() {
                if best.is_none_or(|(bv, _)| v < bv) {
                    best = Some((v, i));
                }
            }
        }
        let Some((_, piv)) = best else {
            return Err(Error::precision(format!(
                "column {c} has no pivot at working precision"
            )));
        };
        u.swap_rows(c, piv);
        rhs.swap_rows(c, piv);
        let pivot = u.get(c, c).clone();
        for i in c + 1..n {
            if u.get(i, c).is_zero() {
                continue;
            }
            let t = u.get(i, c).try_div(&pivot)?;
            u.row_axpy(i, &t, c);
            rhs.row_axpy(i, &t, c);
        }
    }
    let mut x = ModelMatrix::zeros(a.params(), n, b.cols());
    for k in 0..b.cols() {
        for c in (0..n).rev() {
            let mut acc = rhs.get(c, k).clone();
            for j in c + 1..n {
                acc = &acc - &(u.get(c, j) * x.get(j, k));
            }
            x.set(c, k, acc.try_div(u.get(c, c))?);
        }
    }
    Ok(x)
}

/// Whether every column of `w` lies in the column lattice `A·M`.
pub fn columns_in_image(a: &ModelMatrix, w: &ModelMatrix) -> Result<bool> {
    match solve(a, w) {
        Ok(_) => Ok(true),
        Err(Error::NotDivisible { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::smith_valuations;
    use crate::ring::{parse_shorthand, ModelRingParams};

    #[test]
    fn diagonal_and_scalar() {
        let r = ModelRingParams::new(5, 1, 2, 10, None).unwrap();
        let u = RingElem::u_pow(&r, 1);
        let a = ModelMatrix::diag(&r, &[u.clone(), -&u]);
        assert_eq!(saturation_ranks(&a, &[u.clone(), -&u]).unwrap(), vec![1, 1]);
        let s = ModelMatrix::scalar(&r, 3, &u);
        assert_eq!(saturation_ranks(&s, std::slice::from_ref(&u)).unwrap(), vec![3]);
        assert!(matches!(
            saturation_ranks(&a, &[u.clone(), u.clone()]),
            Err(Error::EigenvalueCollision(0, 1))
        ));
    }

    #[test]
    fn wild_example_saturations_collapse() {
        let r = ModelRingParams::new(2, 1, 2, 16, None).unwrap();
        let e = |s: &str| parse_shorthand(&r, s).unwrap();
        let a = ModelMatrix::from_rows(&r, vec![vec![e("u"), e("u")], vec![e("0"), e("-u")]]).unwrap();
        let lats = saturated_eigenlattices(&a, &[e("u"), e("-u")]).unwrap();
        assert_eq!(lats.iter().map(ModelMatrix::cols).collect::<Vec<_>>(), vec![1, 1]);
        let joint = lats[0].hcat(&lats[1]).unwrap();
        assert_eq!(joint.residue().rank(), 1);
    }

    #[test]
    fn solve_roundtrip() {
        let r = ModelRingParams::new(3, 1, 2, 12, None).unwrap();
        let e = |s: &str| parse_shorthand(&r, s).unwrap();
        let a = ModelMatrix::from_rows(&r, vec![vec![e("u"), e("1")], vec![e("0"), e("u")]]).unwrap();
        let p = ModelMatrix::scalar(&r, 2, &e("p"));
        let x = solve(&a, &p).unwrap();
        assert!((&(&a * &x) - &p).is_zero());
        assert_eq!(smith_valuations(&x).unwrap().vals, smith_valuations(&a).unwrap().vals);
        assert!(!columns_in_image(&a, &ModelMatrix::identity(&r, 2)).unwrap());
        assert!(columns_in_image(&a, &p).unwrap());
    }

    #[test]
    fn saturation_of_scaled_vector() {
        let r = ModelRingParams::new(3, 1, 1, 8, None).unwrap();
        let b = ModelMatrix::from_ints(&r, &[&[3], &[9]]).unwrap();
        let s = saturate(&b).unwrap();
        assert_eq!(s.cols(), 1);
        assert!(s.get(0, 0).is_unit());
    }
}
