//! Concave polygons (nonincreasing slope tuples) and piecewise-linear
//! break-point functions over an exact scalar.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed};

use crate::error::{Error, Result};

/// Exact ordered field scalar the polygon layer is generic over.
pub trait Scalar: Clone + Ord + Num + Signed + FromPrimitive + fmt::Debug + fmt::Display {
    fn is_integral(&self) -> bool;

    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits the scalar")
    }
}

impl<T> Scalar for Ratio<T>
where
    T: Clone + Integer + Signed + FromPrimitive + fmt::Debug + fmt::Display,
    Ratio<T>: FromPrimitive,
{
    fn is_integral(&self) -> bool {
        self.is_integer()
    }
}

/// A decreasing tuple `a_1 >= ... >= a_n`, read as the concave function on
/// `[0, n]` with `f(0) = 0` and slope `a_i` on `[i-1, i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConcavePolygon<S> {
    slopes: Vec<S>,
}

impl<S: Scalar> ConcavePolygon<S> {
    /// Fails unless the slopes are nonincreasing.
    pub fn new(slopes: Vec<S>) -> Result<Self> {
        if let Some(i) = slopes.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::Validation(format!(
                "slopes increase at index {}: {} < {}",
                i + 1,
                slopes[i],
                slopes[i + 1]
            )));
        }
        Ok(ConcavePolygon { slopes })
    }

    /// Sorts the slopes into nonincreasing order.
    pub fn from_unsorted(mut slopes: Vec<S>) -> Self {
        slopes.sort_by(|a, b| b.cmp(a));
        ConcavePolygon { slopes }
    }

    pub fn zero(n: usize) -> Self {
        ConcavePolygon { slopes: vec![S::zero(); n] }
    }

    pub fn slopes(&self) -> &[S] {
        &self.slopes
    }

    pub fn into_slopes(self) -> Vec<S> {
        self.slopes
    }

    pub fn len(&self) -> usize {
        self.slopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slopes.is_empty()
    }

    /// Value at the right end, `f(n)`.
    pub fn total(&self) -> S {
        self.slopes.iter().fold(S::zero(), |acc, a| acc + a.clone())
    }

    /// `f(0), f(1), ..., f(n)`.
    pub fn prefix_sums(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut acc = S::zero();
        out.push(acc.clone());
        for a in &self.slopes {
            acc = acc + a.clone();
            out.push(acc.clone());
        }
        out
    }

    pub fn to_function(&self) -> BreakFunction<S> {
        let pts = self
            .prefix_sums()
            .into_iter()
            .enumerate()
            .map(|(i, y)| (S::from_usize_exact(i), y))
            .collect();
        BreakFunction::from_vertices(pts)
    }

    /// Appends copies of `value` up to length `n` and re-sorts.
    pub fn padded(&self, n: usize, value: S) -> Self {
        let mut slopes = self.slopes.clone();
        while slopes.len() < n {
            slopes.push(value.clone());
        }
        Self::from_unsorted(slopes)
    }
}

impl<S: Scalar> fmt::Display for ConcavePolygon<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.slopes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// First integer `x` in `1..=n` with `f(x) > g(x)`, or `n` when only the
/// totals differ; `None` when `f <= g`.
pub fn poly_leq_witness<S: Scalar>(
    f: &ConcavePolygon<S>,
    g: &ConcavePolygon<S>,
) -> Result<Option<usize>> {
    if f.len() != g.len() {
        return Err(Error::LengthMismatch(f.len(), g.len()));
    }
    let (pf, pg) = (f.prefix_sums(), g.prefix_sums());
    if let Some(i) = (1..pf.len()).find(|&i| pf[i] > pg[i]) {
        return Ok(Some(i));
    }
    if pf.last() != pg.last() {
        return Ok(Some(f.len()));
    }
    Ok(None)
}

/// `f <= g`: prefix sums of `f` bounded by those of `g`, with equal totals.
pub fn poly_leq<S: Scalar>(f: &ConcavePolygon<S>, g: &ConcavePolygon<S>) -> Result<bool> {
    poly_leq_witness(f, g).map(|w| w.is_none())
}

/// `sum_k c_k f_k` for nonnegative `c_k`.
pub fn poly_combine<S: Scalar>(coeffs: &[S], polys: &[ConcavePolygon<S>]) -> Result<ConcavePolygon<S>> {
    if coeffs.len() != polys.len() {
        return Err(Error::LengthMismatch(coeffs.len(), polys.len()));
    }
    if let Some(c) = coeffs.iter().find(|c| c.is_negative()) {
        return Err(Error::Validation(format!("negative combination coefficient {c}")));
    }
    let n = polys.first().map_or(0, |p| p.len());
    if let Some(p) = polys.iter().find(|p| p.len() != n) {
        return Err(Error::LengthMismatch(n, p.len()));
    }
    let slopes = (0..n)
        .map(|i| {
            coeffs
                .iter()
                .zip(polys)
                .fold(S::zero(), |acc, (c, p)| acc + c.clone() * p.slopes[i].clone())
        })
        .collect();
    ConcavePolygon::new(slopes)
}

/// `(1 - a_n, ..., 1 - a_1)` for slopes in `[0, 1]`.
pub fn poly_dual<S: Scalar>(f: &ConcavePolygon<S>) -> Result<ConcavePolygon<S>> {
    if let Some(a) = f.slopes.iter().find(|a| a.is_negative() || **a > S::one()) {
        return Err(Error::SlopeOutOfRange(a.to_string()));
    }
    Ok(ConcavePolygon {
        slopes: f.slopes.iter().rev().map(|a| S::one() - a.clone()).collect(),
    })
}

/// `x -> (1/d) f(d x)` on `[0, n/d]`, for `d` dividing `n`.
pub fn poly_rescale<S: Scalar>(f: &ConcavePolygon<S>, d: usize) -> Result<BreakFunction<S>> {
    if d == 0 || !f.len().is_multiple_of(d) {
        return Err(Error::NonDivisibleHeight {
            height: f.len().to_string(),
            d: d as u32,
        });
    }
    Ok(f.to_function().rescale_unchecked(d))
}

/// Upper concave envelope of `points` over `[0, width]`, anchored at the origin.
pub fn concave_hull<S: Scalar>(points: &[(S, S)], width: &S) -> Result<BreakFunction<S>> {
    let origin = (S::zero(), S::zero());
    if !points.contains(&origin) {
        return Err(Error::MissingEndpoint("the origin (0, 0)".into()));
    }
    if !points.iter().any(|(x, _)| x == width) {
        return Err(Error::MissingEndpoint(format!("a point with x = {width}")));
    }
    if let Some((x, _)) = points.iter().find(|(x, _)| x.is_negative() || x > width) {
        return Err(Error::Validation(format!("point x = {x} outside [0, {width}]")));
    }
    let mut pts = points.to_vec();
    pts.sort();
    // for repeated x keep the highest point (sorted ascending, so the last)
    let mut dedup: Vec<(S, S)> = Vec::with_capacity(pts.len());
    for p in pts {
        match dedup.last_mut() {
            Some(last) if last.0 == p.0 => *last = p,
            _ => dedup.push(p),
        }
    }
    let mut hull: Vec<(S, S)> = Vec::new();
    for p in dedup {
        while hull.len() >= 2 {
            let a = &hull[hull.len() - 2];
            let b = &hull[hull.len() - 1];
            // drop b unless it lies strictly above the chord a-p
            let cross = (b.0.clone() - a.0.clone()) * (p.1.clone() - a.1.clone())
                - (b.1.clone() - a.1.clone()) * (p.0.clone() - a.0.clone());
            if cross.is_negative() {
                break;
            }
            hull.pop();
        }
        hull.push(p);
    }
    Ok(BreakFunction::from_vertices(hull))
}

/// A continuous piecewise-linear function on `[0, w]` with `g(0) = 0`, given
/// by its vertices; break points need not be integral.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BreakFunction<S> {
    vertices: Vec<(S, S)>,
}

impl<S: Scalar> BreakFunction<S> {
    /// Builds from vertices sorted by `x`, merging collinear runs.
    pub fn from_vertices(vertices: Vec<(S, S)>) -> Self {
        let mut out: Vec<(S, S)> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if let Some(last) = out.last() {
                if last.0 == v.0 {
                    continue;
                }
            }
            if out.len() >= 2 {
                let a = &out[out.len() - 2];
                let b = &out[out.len() - 1];
                let cross = (b.0.clone() - a.0.clone()) * (v.1.clone() - a.1.clone())
                    - (b.1.clone() - a.1.clone()) * (v.0.clone() - a.0.clone());
                if cross.is_zero() {
                    out.pop();
                }
            }
            out.push(v);
        }
        BreakFunction { vertices: out }
    }

    pub fn vertices(&self) -> &[(S, S)] {
        &self.vertices
    }

    pub fn width(&self) -> S {
        self.vertices.last().map_or(S::zero(), |v| v.0.clone())
    }

    pub fn end_value(&self) -> S {
        self.vertices.last().map_or(S::zero(), |v| v.1.clone())
    }

    /// Value at `x`, for `x` inside `[0, width]`.
    pub fn value_at(&self, x: &S) -> S {
        let vs = &self.vertices;
        if vs.is_empty() {
            return S::zero();
        }
        for w in vs.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if *x <= b.0 {
                return a.1.clone()
                    + (b.1.clone() - a.1.clone()) * (x.clone() - a.0.clone()) / (b.0.clone() - a.0.clone());
            }
        }
        vs[vs.len() - 1].1.clone()
    }

    /// Slopes of the consecutive segments, with their lengths.
    pub fn segments(&self) -> Vec<(S, S)> {
        self.vertices
            .windows(2)
            .map(|w| {
                let dx = w[1].0.clone() - w[0].0.clone();
                ((w[1].1.clone() - w[0].1.clone()) / dx.clone(), dx)
            })
            .collect()
    }

    pub fn is_concave(&self) -> bool {
        self.segments().windows(2).all(|w| w[0].0 >= w[1].0)
    }

    /// `x -> (1/d) g(d x)`.
    pub fn rescale(&self, d: usize) -> Result<Self> {
        let w = self.width();
        let d_s = S::from_usize_exact(d);
        if d == 0 || !w.is_integral() || !(w.clone() / d_s).is_integral() {
            return Err(Error::NonDivisibleHeight { height: w.to_string(), d: d as u32 });
        }
        Ok(self.rescale_unchecked(d))
    }

    fn rescale_unchecked(&self, d: usize) -> Self {
        let d = S::from_usize_exact(d);
        Self::from_vertices(
            self.vertices
                .iter()
                .map(|(x, y)| (x.clone() / d.clone(), y.clone() / d.clone()))
                .collect(),
        )
    }

    /// Converts back to a slope tuple when every break point is integral.
    pub fn to_polygon(&self) -> Result<ConcavePolygon<S>> {
        if self.vertices.iter().any(|(x, _)| !x.is_integral()) {
            return Err(Error::NonIntegralBreaks);
        }
        let mut slopes = Vec::new();
        for (slope, len) in self.segments() {
            let mut k = S::zero();
            while k < len {
                slopes.push(slope.clone());
                k = k + S::one();
            }
        }
        ConcavePolygon::new(slopes)
    }

    fn merged_xs(&self, other: &Self) -> Vec<S> {
        let mut xs: Vec<S> = self
            .vertices
            .iter()
            .chain(&other.vertices)
            .map(|v| v.0.clone())
            .collect();
        xs.sort();
        xs.dedup();
        xs
    }

    /// `self <= other` pointwise with equal end values; on failure the first
    /// break point where it is violated.
    pub fn leq_witness(&self, other: &Self) -> Result<Option<S>> {
        if self.width() != other.width() {
            return Err(Error::Validation(format!(
                "functions on [0, {}] and [0, {}] are not comparable",
                self.width(),
                other.width()
            )));
        }
        for x in self.merged_xs(other) {
            if self.value_at(&x) > other.value_at(&x) {
                return Ok(Some(x));
            }
        }
        if self.end_value() != other.end_value() {
            return Ok(Some(self.width()));
        }
        Ok(None)
    }

    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.leq_witness(other).map(|w| w.is_none())
    }

    /// Largest `|f(x) - g(x)|`, attained at a break point of either.
    pub fn sup_distance(&self, other: &Self) -> S {
        self.merged_xs(other)
            .into_iter()
            .map(|x| (self.value_at(&x) - other.value_at(&x)).abs())
            .max()
            .unwrap_or_else(S::zero)
    }
}

/// Pointwise minimum of functions sharing a width.
pub fn pointwise_min<S: Scalar>(fs: &[BreakFunction<S>]) -> Option<BreakFunction<S>> {
    fs.first()?;
    let mut xs: Vec<S> = fs.iter().flat_map(|f| f.vertices.iter().map(|v| v.0.clone())).collect();
    xs.sort();
    xs.dedup();
    let mut cand = xs.clone();
    // crossings of any two functions inside each elementary interval
    for w in xs.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        for (i, f) in fs.iter().enumerate() {
            for g in &fs[i + 1..] {
                let da = f.value_at(a) - g.value_at(a);
                let db = f.value_at(b) - g.value_at(b);
                if (da.is_positive() && db.is_negative()) || (da.is_negative() && db.is_positive()) {
                    let t = da.clone() / (da - db);
                    cand.push(a.clone() + t * (b.clone() - a.clone()));
                }
            }
        }
    }
    cand.sort();
    cand.dedup();
    let pts = cand
        .into_iter()
        .map(|x| {
            let y = fs.iter().map(|f| f.value_at(&x)).min().expect("nonempty");
            (x, y)
        })
        .collect();
    Some(BreakFunction::from_vertices(pts))
}

impl<S: Scalar> fmt::Display for BreakFunction<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (x, y)) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({x}, {y})")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn q(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    fn poly(v: &[(i64, i64)]) -> ConcavePolygon<Rational64> {
        ConcavePolygon::new(v.iter().map(|&(a, b)| q(a, b)).collect()).unwrap()
    }

    #[test]
    fn order_examples() {
        let a = poly(&[(2, 3), (1, 3)]);
        let b = poly(&[(1, 1), (0, 1)]);
        assert!(poly_leq(&a, &b).unwrap());
        assert!(!poly_leq(&b, &a).unwrap());
        assert_eq!(poly_leq_witness(&b, &a).unwrap(), Some(1));
        let h = poly(&[(1, 2), (1, 2)]);
        assert!(poly_leq(&h, &h).unwrap());
        assert!(matches!(
            poly_leq(&h, &poly(&[(1, 1)])),
            Err(Error::LengthMismatch(2, 1))
        ));
        // totals differ
        assert_eq!(poly_leq_witness(&poly(&[(0, 1)]), &poly(&[(1, 1)])).unwrap(), Some(1));
    }

    #[test]
    fn rejects_increasing() {
        assert!(ConcavePolygon::new(vec![q(0, 1), q(1, 1)]).is_err());
    }

    #[test]
    fn combine_examples() {
        let one_zero = poly(&[(1, 1), (0, 1)]);
        let third = q(1, 3);
        let avg = poly_combine(&[third, third, third], &[one_zero.clone(), one_zero.clone(), one_zero.clone()])
            .unwrap();
        assert_eq!(avg, one_zero);
        let r = poly_combine(&[q(1, 2), q(1, 2)], &[one_zero, poly(&[(1, 1), (1, 1)])]).unwrap();
        assert_eq!(r, poly(&[(1, 1), (1, 2)]));
    }

    #[test]
    fn rescale_examples() {
        let f = poly(&[(2, 3), (2, 3), (2, 3), (1, 3), (1, 3), (1, 3)]);
        let g = poly_rescale(&f, 3).unwrap().to_polygon().unwrap();
        assert_eq!(g, poly(&[(2, 3), (1, 3)]));
        assert_eq!(poly_rescale(&f, 1).unwrap().to_polygon().unwrap(), f);
        let h = poly(&[(1, 1), (1, 1), (0, 1), (0, 1)]);
        assert_eq!(poly_rescale(&h, 2).unwrap().to_polygon().unwrap(), poly(&[(1, 1), (0, 1)]));
        assert!(matches!(poly_rescale(&h, 3), Err(Error::NonDivisibleHeight { .. })));
        // break at x = 1/2
        let k = poly(&[(1, 1), (0, 1)]);
        assert!(matches!(poly_rescale(&k, 2).unwrap().to_polygon(), Err(Error::NonIntegralBreaks)));
    }

    #[test]
    fn dual_examples() {
        let a = poly(&[(1, 1), (0, 1)]);
        assert_eq!(poly_dual(&a).unwrap(), a);
        assert_eq!(poly_dual(&poly(&[(1, 1), (1, 1), (0, 1)])).unwrap(), poly(&[(1, 1), (0, 1), (0, 1)]));
        assert!(matches!(poly_dual(&poly(&[(3, 2)])), Err(Error::SlopeOutOfRange(_))));
    }

    #[test]
    fn hull_examples() {
        let z = q(0, 1);
        let h = concave_hull(&[(z, z), (q(2, 1), q(1, 1))], &q(2, 1)).unwrap();
        assert_eq!(h.to_polygon().unwrap(), poly(&[(1, 2), (1, 2)]));
        let h = concave_hull(&[(z, z), (q(1, 1), q(1, 1)), (q(2, 1), q(1, 1))], &q(2, 1)).unwrap();
        assert_eq!(h.to_polygon().unwrap(), poly(&[(1, 1), (0, 1)]));
        let h = concave_hull(&[(z, z), (q(1, 1), q(1, 4)), (q(2, 1), q(1, 1))], &q(2, 1)).unwrap();
        assert_eq!(h.to_polygon().unwrap(), poly(&[(1, 2), (1, 2)]));
        assert!(matches!(
            concave_hull(&[(q(1, 1), q(1, 1)), (q(2, 1), q(1, 1))], &q(2, 1)),
            Err(Error::MissingEndpoint(_))
        ));
        assert!(matches!(concave_hull(&[(z, z)], &q(2, 1)), Err(Error::MissingEndpoint(_))));
    }

    #[test]
    fn min_with_crossing() {
        let a = poly(&[(1, 1), (0, 1)]).to_function();
        let b = poly(&[(3, 4), (1, 4)]).to_function();
        let m = pointwise_min(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(m.vertices(), &[(q(0, 1), q(0, 1)), (q(1, 1), q(3, 4)), (q(2, 1), q(1, 1))]);
        assert_eq!(pointwise_min(std::slice::from_ref(&a)).unwrap(), a);
        // crossing inside an interval
        let c = BreakFunction::from_vertices(vec![(q(0, 1), q(0, 1)), (q(2, 1), q(2, 1))]);
        let d = BreakFunction::from_vertices(vec![(q(0, 1), q(0, 1)), (q(1, 1), q(3, 2)), (q(2, 1), q(3, 2))]);
        let m = pointwise_min(&[c, d]).unwrap();
        assert_eq!(m.value_at(&q(3, 2)), q(3, 2));
        assert!(m.is_concave());
    }
}
