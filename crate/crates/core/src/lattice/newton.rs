use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{smith_valuations, ModelMatrix};
use crate::error::{Error, Result};
use crate::ring::RingElem;

/// How [`newton_slopes`] obtains the slopes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NewtonMode {
    /// Newton polygon of the characteristic polynomial; entries must be Frobenius-fixed.
    Charpoly,
    /// Limit of normalised Hodge polygons of `phi^m`, `m` doubling.
    Limit,
}

/// Largest power tried in limit mode.
pub const LIMIT_MAX_POWER: u64 = 1 << 12;

/// Matrix of `phi^m` for `phi = A sigma`: `A sigma(A) ... sigma^{m-1}(A)`.
pub fn semilinear_power(a: &ModelMatrix, m: u64) -> Result<ModelMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("{}x{} is not square", a.rows(), a.cols())));
    }
    if m == 0 {
        return Err(Error::Dimension("power must be at least 1".into()));
    }
    let f = a.params().residue_degree() as u64;
    // acc = Phi_r, base = Phi_{2^k}; Phi_{r+s} = Phi_r sigma^r(Phi_s)
    let mut acc: Option<(ModelMatrix, u64)> = None;
    let mut base = a.clone();
    let mut step = 1u64;
    let mut rest = m;
    loop {
        if rest & 1 == 1 {
            acc = Some(match acc {
                None => (base.clone(), step),
                Some((x, r)) => (x.try_mul(&base.frobenius_pow((r % f) as usize))?, r + step),
            });
        }
        rest >>= 1;
        if rest == 0 {
            break;
        }
        base = base.try_mul(&base.frobenius_pow((step % f) as usize))?;
        step *= 2;
    }
    Ok(acc.expect("m >= 1").0)
}

/// Coefficients `c_0, ..., c_n` of `det(x I - A)` by the division-free
/// Berkowitz recursion.
pub fn charpoly(a: &ModelMatrix) -> Result<Vec<RingElem>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("{}x{} is not square", a.rows(), a.cols())));
    }
    let prm = a.params();
    let n = a.rows();
    if n == 0 {
        return Ok(vec![RingElem::one(prm)]);
    }
    // Toeplitz factors, built from the largest leading block downwards.
    let mut transforms: Vec<Vec<Vec<RingElem>>> = Vec::new();
    let mut cur = a.clone();
    for size in (2..=n).rev() {
        let a00 = cur.get(0, 0).clone();
        let r = cur.block(0, 1, 1, size - 1);
        let c = cur.block(1, 0, size - 1, 1);
        let rest = cur.block(1, 1, size - 1, size - 1);
        let mut items = vec![RingElem::one(prm), -&a00];
        let mut v = c;
        for i in 0..size - 1 {
            if i > 0 {
                v = rest.try_mul(&v)?;
            }
            items.push(-r.try_mul(&v)?.get(0, 0));
        }
        let mut t = vec![vec![RingElem::zero(prm); size]; size + 1];
        for col in 0..size {
            for k in 0..=size - col {
                t[col + k][col] = items[k].clone();
            }
        }
        transforms.push(t);
        cur = rest;
    }
    let mut poly = vec![RingElem::one(prm), -cur.get(0, 0)];
    for t in transforms.iter().rev() {
        let next = t
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&poly)
                    .fold(RingElem::zero(prm), |acc, (x, y)| &acc + &(x * y))
            })
            .collect();
        poly = next;
    }
    poly.reverse();
    Ok(poly)
}

/// Determinant, read off the characteristic polynomial.
pub fn determinant(a: &ModelMatrix) -> Result<RingElem> {
    let c = charpoly(a)?;
    let c0 = c[0].clone();
    Ok(if a.rows() % 2 == 1 { -&c0 } else { c0 })
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Lower convex hull of points sorted by `x`.
fn lower_hull(points: &[(BigRational, BigRational)]) -> Vec<(BigRational, BigRational)> {
    let mut hull: Vec<(BigRational, BigRational)> = Vec::new();
    for p in points {
        while hull.len() >= 2 {
            let a = &hull[hull.len() - 2];
            let b = &hull[hull.len() - 1];
            let cross = (&b.0 - &a.0) * (&p.1 - &a.1) - (&b.1 - &a.1) * (&p.0 - &a.0);
            if cross.is_positive() {
                break;
            }
            hull.pop();
        }
        hull.push(p.clone());
    }
    hull
}

fn hull_value(hull: &[(BigRational, BigRational)], x: &BigRational) -> BigRational {
    for w in hull.windows(2) {
        if *x <= w[1].0 {
            return &w[0].1 + (&w[1].1 - &w[0].1) * (x - &w[0].0) / (&w[1].0 - &w[0].0);
        }
    }
    hull.last().map(|p| p.1.clone()).unwrap_or_default()
}

fn charpoly_slopes(a: &ModelMatrix) -> Result<Vec<BigRational>> {
    if !a.is_frobenius_fixed() {
        return Err(Error::Validation(
            "characteristic-polynomial slopes need Frobenius-fixed entries".into(),
        ));
    }
    let n_ram = a.params().ram_index() as i64;
    let coeffs = charpoly(a)?;
    let mut pts = Vec::new();
    let mut unknown = Vec::new();
    for (i, c) in coeffs.iter().enumerate() {
        match c.val_u() {
            Some(v) => pts.push((rat(i as i64, 1), rat(v as i64, n_ram))),
            None => unknown.push((i, rat(c.prec() as i64, n_ram))),
        }
    }
    if coeffs[0].val_u().is_none() {
        return Err(Error::precision("determinant vanishes at working precision"));
    }
    let hull = lower_hull(&pts);
    for (i, bound) in &unknown {
        if hull_value(&hull, &rat(*i as i64, 1)) > *bound {
            return Err(Error::precision(format!(
                "coefficient of x^{i} is below precision and could lower the Newton polygon"
            )));
        }
    }
    let mut slopes = Vec::with_capacity(a.rows());
    for w in hull.windows(2) {
        let len = &w[1].0 - &w[0].0;
        let s = -(&w[1].1 - &w[0].1) / &len;
        let k = len.to_integer();
        let k: usize = k.try_into().expect("segment length fits usize");
        slopes.extend(std::iter::repeat_n(s, k));
    }
    Ok(slopes)
}

/// Nearest rational with denominator at most `max_den`; ties go to the
/// smaller denominator.
pub fn round_to_denominator(x: &BigRational, max_den: usize) -> BigRational {
    let mut best: Option<(BigRational, BigRational)> = None;
    for b in 1..=max_den.max(1) {
        let b = BigInt::from(b);
        let num = (x * BigRational::from_integer(b.clone())).round().to_integer();
        let cand = BigRational::new(num, b);
        let err = (&cand - x).abs();
        if best.as_ref().is_none_or(|(_, e)| err < *e) {
            best = Some((cand, err));
        }
    }
    best.expect("at least one denominator").0
}

fn hodge_over_m(a: &ModelMatrix, m: u64) -> Result<Vec<BigRational>> {
    let ed = smith_valuations(&semilinear_power(a, m)?)?;
    if ed.rank_deficit > 0 {
        return Err(Error::precision(format!(
            "phi^{m} has elementary divisors beyond working precision"
        )));
    }
    let mm = BigRational::from_integer(BigInt::from(m));
    Ok(ed.vals.into_iter().map(|v| v / &mm).collect())
}

fn prefix_distance(a: &[BigRational], b: &[BigRational]) -> BigRational {
    let (mut sa, mut sb) = (BigRational::zero(), BigRational::zero());
    let mut worst = BigRational::zero();
    for (x, y) in a.iter().zip(b) {
        sa += x;
        sb += y;
        worst = worst.max((&sa - &sb).abs());
    }
    worst
}

/// Slopes pass the structural checks of an isocrystal: nonincreasing, total
/// `v(det)`, and each slope `a/b` occurring a multiple of `b` times.
fn plausible(slopes: &[BigRational], total: &BigRational) -> bool {
    if slopes.windows(2).any(|w| w[0] < w[1]) {
        return false;
    }
    if slopes.iter().sum::<BigRational>() != *total {
        return false;
    }
    let mut i = 0;
    while i < slopes.len() {
        let j = (i..slopes.len()).find(|&j| slopes[j] != slopes[i]).unwrap_or(slopes.len());
        let den = slopes[i].denom().clone();
        if BigInt::from(j - i) % den != BigInt::zero() {
            return false;
        }
        i = j;
    }
    true
}

fn limit_slopes(a: &ModelMatrix, tol: &BigRational, m_max: u64) -> Result<Vec<BigRational>> {
    let n = a.rows();
    let det = smith_valuations(a)?;
    if det.rank_deficit > 0 {
        return Err(Error::precision("phi is singular at working precision"));
    }
    let total = det.total();
    let mut m = 1u64;
    let mut prev = hodge_over_m(a, m)?;
    while m < m_max {
        m *= 2;
        let cur = hodge_over_m(a, m)?;
        if prefix_distance(&prev, &cur) < *tol {
            let rounded: Vec<BigRational> = cur.iter().map(|x| round_to_denominator(x, n)).collect();
            if plausible(&rounded, &total) {
                return Ok(rounded);
            }
        }
        prev = cur;
    }
    Err(Error::NoConvergence(m_max))
}

/// Newton slopes of `phi = A sigma`, nonincreasing.
pub fn newton_slopes(a: &ModelMatrix, mode: NewtonMode, tol: &BigRational) -> Result<Vec<BigRational>> {
    newton_slopes_bounded(a, mode, tol, LIMIT_MAX_POWER)
}

/// [`newton_slopes`] with an explicit cap on the power used in limit mode.
pub fn newton_slopes_bounded(
    a: &ModelMatrix,
    mode: NewtonMode,
    tol: &BigRational,
    m_max: u64,
) -> Result<Vec<BigRational>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("{}x{} is not square", a.rows(), a.cols())));
    }
    if a.rows() == 0 {
        return Ok(Vec::new());
    }
    match mode {
        NewtonMode::Charpoly => charpoly_slopes(a),
        NewtonMode::Limit => limit_slopes(a, tol, m_max),
    }
}

/// Default convergence tolerance for limit mode.
pub fn default_tolerance() -> BigRational {
    BigRational::one() / BigRational::from_integer(24.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::ModelRingParams;

    #[test]
    fn worked_example_blocks() {
        // limit mode reaches phi^32, whose divisors have valuation about 22
        let r = ModelRingParams::new(5, 1, 1, 40, None).unwrap();
        let a = ModelMatrix::from_ints(&r, &[&[0, 5, 0], &[0, 0, 5], &[1, 0, 0]]).unwrap();
        let b = ModelMatrix::from_ints(&r, &[&[0, 0, 5], &[1, 0, 0], &[0, 1, 0]]).unwrap();
        let tol = default_tolerance();
        assert_eq!(newton_slopes(&a, NewtonMode::Charpoly, &tol).unwrap(), vec![rat(2, 3); 3]);
        assert_eq!(newton_slopes(&b, NewtonMode::Charpoly, &tol).unwrap(), vec![rat(1, 3); 3]);
        assert_eq!(newton_slopes(&a, NewtonMode::Limit, &tol).unwrap(), vec![rat(2, 3); 3]);
        assert_eq!(newton_slopes(&b, NewtonMode::Limit, &tol).unwrap(), vec![rat(1, 3); 3]);
        let p = ModelMatrix::from_ints(&r, &[&[5]]).unwrap();
        assert_eq!(newton_slopes(&p, NewtonMode::Charpoly, &tol).unwrap(), vec![rat(1, 1)]);
    }

    #[test]
    fn charpoly_matches_cofactor_det() {
        let r = ModelRingParams::new(3, 1, 2, 10, None).unwrap();
        let mut rng = rand::thread_rng();
        for n in 1..=4 {
            let a = ModelMatrix::random(&r, n, n, &mut rng, 0);
            let d1 = determinant(&a).unwrap();
            let d2 = super::super::cofactor_det(&a);
            assert!((&d1 - &d2).is_zero());
        }
    }

    #[test]
    fn semilinear_powers() {
        let r = ModelRingParams::new(3, 2, 1, 6, None).unwrap();
        let y = RingElem::y(&r);
        let a = ModelMatrix::from_rows(&r, vec![vec![y.clone()]]).unwrap();
        assert_eq!(semilinear_power(&a, 1).unwrap(), a);
        let a2 = semilinear_power(&a, 2).unwrap();
        assert_eq!(a2.get(0, 0), &(&y * &y.frobenius()));
        let a5 = semilinear_power(&a, 5).unwrap();
        let mut expect = RingElem::one(&r);
        for k in 0..5 {
            expect = &expect * &y.frobenius_pow(k);
        }
        assert_eq!(a5.get(0, 0), &expect);
        let s = ModelMatrix::from_ints(&r, &[&[1, 3], &[0, 2]]).unwrap();
        assert_eq!(semilinear_power(&s, 2).unwrap(), &s * &s);
    }

    #[test]
    fn rounding() {
        assert_eq!(round_to_denominator(&rat(65, 96), 3), rat(2, 3));
        assert_eq!(round_to_denominator(&rat(1, 2), 3), rat(1, 2));
        assert_eq!(round_to_denominator(&rat(1, 100), 6), rat(0, 1));
    }
}
