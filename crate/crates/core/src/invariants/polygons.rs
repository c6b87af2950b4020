use num_traits::{One, Signed, Zero};

use super::StructuredDatum;
use crate::error::{Error, Result};
use crate::lattice::{
    default_tolerance, kernel_rank_chain, kernel_rank_chain_quotient, newton_slopes, smith_valuations, solve,
    ModelMatrix, NewtonMode,
};
use crate::polygon::{poly_combine, poly_dual, poly_rescale};
use crate::ring::RingElem;
use crate::{rational, Polygon, Rational};

/// Integral Hodge polygon, per unramified embedding and averaged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralHodge {
    pub per_upsilon: Vec<Polygon>,
    pub averaged: Polygon,
}

/// Where the special-fibre Hodge polygon is read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HodgeSource {
    Omega,
    Dieudonne,
}

fn omega(datum: &StructuredDatum) -> Result<&[ModelMatrix]> {
    datum
        .pi_on_omega
        .as_deref()
        .ok_or_else(|| Error::Missing("pi_on_omega".into()))
}

fn average(polys: &[Polygon]) -> Result<Polygon> {
    let w = rational(1, polys.len() as i64);
    poly_combine(&vec![w; polys.len()], polys)
}

/// Positive elementary divisor valuations of `a`, padded with zeros to `n`.
pub fn divisor_polygon(a: &ModelMatrix, n: usize) -> Result<Polygon> {
    let ed = smith_valuations(a)?;
    if ed.rank_deficit > 0 {
        return Err(Error::precision(format!(
            "{} elementary divisor(s) of a {}x{} matrix vanish at working precision",
            ed.rank_deficit,
            a.rows(),
            a.cols()
        )));
    }
    let pos: Vec<Rational> = ed.vals.into_iter().filter(|v| v.is_positive()).collect();
    if pos.len() > n {
        return Err(Error::NotRealizable(format!(
            "{} positive elementary divisors exceed n = {n}",
            pos.len()
        )));
    }
    Ok(Polygon::new(pos)?.padded(n, Rational::zero()))
}

pub fn integral_hodge(datum: &StructuredDatum) -> Result<IntegralHodge> {
    let per_upsilon = omega(datum)?
        .iter()
        .map(|a| divisor_polygon(a, datum.n))
        .collect::<Result<Vec<_>>>()?;
    let averaged = average(&per_upsilon)?;
    Ok(IntegralHodge { per_upsilon, averaged })
}

/// `x -> (1/e) sum_j min(x, g_j)` on `[0, n]`.
pub fn hodge_from_chain(g: &[usize], e: usize, n: usize) -> Result<Polygon> {
    if g.first().is_some_and(|&g1| g1 > n) {
        return Err(Error::NotRealizable(format!("g_1 = {} exceeds n = {n}", g[0])));
    }
    if g.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::NotRealizable(format!("kernel chain {g:?} is not nonincreasing")));
    }
    let slopes = (1..=n)
        .map(|i| rational(g.iter().filter(|&&gj| gj >= i).count() as i64, e as i64))
        .collect();
    Polygon::new(slopes)
}

/// The graded kernel chains `g_j` of `pi` on each `omega_v` of the special fibre.
pub fn hodge_chains(datum: &StructuredDatum, source: HodgeSource) -> Result<Vec<Vec<usize>>> {
    match source {
        HodgeSource::Omega => omega(datum)?
            .iter()
            .map(|a| kernel_rank_chain(&a.residue(), datum.e))
            .collect(),
        HodgeSource::Dieudonne => {
            let dd = datum
                .dieudonne
                .as_ref()
                .ok_or_else(|| Error::Missing("phi and pi_on_D".into()))?;
            let blk = datum.e * datum.n;
            let size = datum.d() * datum.n;
            (0..datum.f)
                .map(|v| {
                    let nbar = dd.pi_on_d.block(v * blk, v * blk, blk, blk).residue();
                    let w = dd.phi.block(v * blk, 0, blk, size).residue();
                    kernel_rank_chain_quotient(&nbar, &w, datum.e)
                })
                .collect()
        }
    }
}

pub fn hodge_special_fibre_per_upsilon(datum: &StructuredDatum, source: HodgeSource) -> Result<Vec<Polygon>> {
    hodge_chains(datum, source)?
        .iter()
        .map(|g| hodge_from_chain(g, datum.e, datum.n))
        .collect()
}

pub fn hodge_special_fibre(datum: &StructuredDatum, source: HodgeSource) -> Result<Polygon> {
    average(&hodge_special_fibre_per_upsilon(datum, source)?)
}

/// Slopes of `x -> (1/w) sum_tau min(x, r_tau)` on `[0, n]`.
pub fn pr_from_ranks(r: &[usize], n: usize, w: usize) -> Result<Polygon> {
    if let Some(&bad) = r.iter().find(|&&x| x > n) {
        return Err(Error::RTauOutOfRange { value: bad, n });
    }
    let slopes = (1..=n)
        .map(|i| rational(r.iter().filter(|&&x| x >= i).count() as i64, w as i64))
        .collect();
    Polygon::new(slopes)
}

fn r_tau(datum: &StructuredDatum) -> Result<&[usize]> {
    datum.r_tau.as_deref().ok_or_else(|| Error::Missing("r_tau".into()))
}

pub fn pappas_rapoport(datum: &StructuredDatum) -> Result<Polygon> {
    pr_from_ranks(r_tau(datum)?, datum.n, datum.d())
}

/// `PR_v = (1/e) sum_{tau | v} min(x, r_tau)`.
pub fn pappas_rapoport_per_upsilon(datum: &StructuredDatum) -> Result<Vec<Polygon>> {
    let r = r_tau(datum)?;
    if r.len() != datum.d() {
        return Err(Error::LengthMismatch(r.len(), datum.d()));
    }
    r.chunks(datum.e)
        .map(|chunk| pr_from_ranks(chunk, datum.n, datum.e))
        .collect()
}

/// Newton polygon of `phi`, renormalised by `d` to `[0, n]`.
pub fn newton_special_fibre(datum: &StructuredDatum) -> Result<Polygon> {
    let dd = datum
        .dieudonne
        .as_ref()
        .ok_or_else(|| Error::Missing("phi".into()))?;
    let mode = if dd.phi.is_frobenius_fixed() {
        NewtonMode::Charpoly
    } else {
        NewtonMode::Limit
    };
    let slopes = newton_slopes(&dd.phi, mode, &default_tolerance())?;
    poly_rescale(&Polygon::new(slopes)?, datum.d())?.to_polygon()
}

/// `v(Fitt_0)` of the module presented by `a`, divided by `f_weight`.
pub fn degree_from_presentation(a: &ModelMatrix, f_weight: usize) -> Result<Rational> {
    let ed = smith_valuations(a)?;
    if ed.rank_deficit > 0 {
        return Err(Error::precision("presentation is singular at working precision"));
    }
    Ok(ed.total() / rational(f_weight as i64, 1))
}

/// `p A^{-1}`, integral whenever every divisor of `A` is at most 1.
pub fn dual_matrix(a: &ModelMatrix) -> Result<ModelMatrix> {
    let p = RingElem::from_int(a.params(), a.params().p() as i64);
    solve(a, &ModelMatrix::scalar(a.params(), a.rows(), &p))
}

/// Dual polygon read off `p A^{-1}`: divisors below 1, padded with 1s to `n`.
fn dual_by_inverse(datum: &StructuredDatum) -> Result<Polygon> {
    let per = omega(datum)?
        .iter()
        .map(|a| {
            let ed = smith_valuations(&dual_matrix(a)?)?;
            if ed.rank_deficit > 0 {
                return Err(Error::precision("p A^-1 is singular at working precision"));
            }
            let small: Vec<Rational> = ed.vals.into_iter().filter(|v| *v < Rational::one()).collect();
            if small.len() > datum.n {
                return Err(Error::NotRealizable(format!(
                    "{} divisors of p A^-1 below 1 exceed n = {}",
                    small.len(),
                    datum.n
                )));
            }
            let mut slopes = vec![Rational::one(); datum.n - small.len()];
            slopes.extend(small);
            Polygon::new(slopes)
        })
        .collect::<Result<Vec<_>>>()?;
    average(&per)
}

/// Integral Hodge polygon of the Cartier dual, by reversing and complementing
/// the slopes, cross-checked against the divisors of `p A^{-1}`.
pub fn dual_integral_hodge(datum: &StructuredDatum) -> Result<Polygon> {
    let a = poly_dual(&integral_hodge(datum)?.averaged)?;
    let b = dual_by_inverse(datum)?;
    if a != b {
        return Err(Error::InternalMismatch(format!(
            "dual polygon {a} from slopes disagrees with {b} from p A^-1"
        )));
    }
    Ok(a)
}

/// Whether `p (p A^{-1})^{-1}` has the divisors of `A` on every block.
pub fn dual_matrix_involution(datum: &StructuredDatum) -> Result<bool> {
    for a in omega(datum)? {
        let back = dual_matrix(&dual_matrix(a)?)?;
        if smith_valuations(&back)? != smith_valuations(a)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `r_tau` from the ranks of the saturated eigenlattices of `[pi]`.
///
/// Eigenvalues that agree to working precision would be merged, so the
/// result carries a caveat when some pair is close.
pub fn derive_r_tau(datum: &StructuredDatum) -> Result<(Vec<usize>, Option<String>)> {
    let tp = datum
        .tau_pi
        .as_ref()
        .ok_or_else(|| Error::Missing("tau_pi".into()))?;
    let mut out = Vec::with_capacity(datum.d());
    for (a, taus) in omega(datum)?.iter().zip(tp) {
        out.extend(crate::lattice::saturation_ranks(a, taus)?);
    }
    let warning = Some(
        "r_tau derived from eigenlattice ranks; eigenvalues agreeing to working precision would merge".into(),
    );
    Ok((out, warning))
}
