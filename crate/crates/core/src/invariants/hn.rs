use super::{StructuredDatum, SubobjectRecord};
use crate::error::{Error, Result};
use crate::polygon::{concave_hull, pointwise_min};
use crate::{rational, BreakFn, Rational};

/// Concave hull of the records together with the origin and `total`,
/// renormalised by `d`.
pub fn hn_polygon(records: &[SubobjectRecord], total: &SubobjectRecord, d: usize) -> Result<BreakFn> {
    let width = rational(total.height as i64, 1);
    let mut points = vec![(Rational::from_integer(0.into()), Rational::from_integer(0.into()))];
    for r in records {
        if r.height > total.height {
            return Err(Error::Validation(format!(
                "subobject of height {} exceeds the total height {}",
                r.height, total.height
            )));
        }
        if r.height == total.height && r.degree != total.degree {
            return Err(Error::Validation(format!(
                "subobject of full height {} has degree {} instead of {}",
                r.height, r.degree, total.degree
            )));
        }
        points.push((rational(r.height as i64, 1), r.degree.clone()));
    }
    points.push((width.clone(), total.degree.clone()));
    concave_hull(&points, &width)?.rescale(d)
}

fn dim_h(datum: &StructuredDatum) -> Result<usize> {
    datum
        .dim_h()
        .ok_or_else(|| Error::Missing("dim H (needs pi_on_omega, r_tau or phi)".into()))
}

/// `HN(H[p], iota)`: height `d n`, degree `dim H`, renormalised by `d`.
pub fn hn_p(datum: &StructuredDatum) -> Result<BreakFn> {
    let recs = datum
        .subobjects_p
        .as_ref()
        .ok_or_else(|| Error::Missing("subobjects_p".into()))?;
    let total = SubobjectRecord::new(datum.d() * datum.n, rational(dim_h(datum)? as i64, 1));
    hn_polygon(recs, &total, datum.d())
}

/// `HN(H[pi], iota^nr)`: height `f n`, degree `dim H / e`, renormalised by `f`.
pub fn hn_pi(datum: &StructuredDatum) -> Result<BreakFn> {
    let recs = datum
        .subobjects_pi
        .as_ref()
        .ok_or_else(|| Error::Missing("subobjects_pi".into()))?;
    let total = SubobjectRecord::new(datum.f * datum.n, rational(dim_h(datum)? as i64, datum.e as i64));
    hn_polygon(recs, &total, datum.f)
}

/// Renormalised tower polygons and their pointwise minimum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerLimit {
    pub levels: Vec<(usize, BreakFn)>,
    pub limit: BreakFn,
    /// Level 1 agrees with the minimum within the tolerance.
    pub consistent: bool,
}

/// Pointwise minimum of `x -> (1/i) HN(H[p^i], iota)(i x)` over the tower.
pub fn hn_tower_limit(datum: &StructuredDatum, tol: &Rational) -> Result<TowerLimit> {
    let tower = datum.hn_tower.as_ref().ok_or_else(|| Error::Missing("hn_tower".into()))?;
    if tower.is_empty() {
        return Err(Error::EmptyTower);
    }
    let h = dim_h(datum)?;
    let levels = tower
        .iter()
        .map(|(&i, recs)| {
            if i == 0 {
                return Err(Error::Validation("hn tower levels start at 1".into()));
            }
            let total = SubobjectRecord::new(i * datum.d() * datum.n, rational((i * h) as i64, 1));
            Ok((i, hn_polygon(recs, &total, i * datum.d())?))
        })
        .collect::<Result<Vec<_>>>()?;
    let fs: Vec<BreakFn> = levels.iter().map(|(_, f)| f.clone()).collect();
    let limit = pointwise_min(&fs).ok_or(Error::EmptyTower)?;
    let consistent = levels
        .iter()
        .find(|(i, _)| *i == 1)
        .is_some_and(|(_, f)| f.sup_distance(&limit) <= *tol);
    Ok(TowerLimit { levels, limit, consistent })
}
