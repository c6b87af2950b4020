use num_integer::Integer;

use super::{integral_hodge, StructuredDatum};
use crate::error::{Error, Result};
use crate::lattice::{saturated_eigenlattices, ModelMatrix};
use crate::{rational, Polygon, Rational};

/// Outcome of the diagonalisability test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagonalisability {
    Diagonalisable,
    NotDiagonalisable,
    /// Precision did not suffice; the string says what went wrong.
    Undecided(String),
}

impl Diagonalisability {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Diagonalisability::Diagonalisable
        } else {
            Diagonalisability::NotDiagonalisable
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Diagonalisability::Diagonalisable => Some(true),
            Diagonalisability::NotDiagonalisable => Some(false),
            Diagonalisability::Undecided(_) => None,
        }
    }
}

fn undecided(e: Error) -> Result<Diagonalisability> {
    match e {
        Error::PrecisionExhausted(_) | Error::DivideByIndistinguishableZero | Error::EigenvalueCollision(..) => {
            Ok(Diagonalisability::Undecided(e.to_string()))
        }
        other => Err(other),
    }
}

fn direct_block(a: &ModelMatrix, taus: &[crate::ring::RingElem]) -> Result<Diagonalisability> {
    let lats = saturated_eigenlattices(a, taus)?;
    let r = a.rows();
    let total: usize = lats.iter().map(ModelMatrix::cols).sum();
    if total < r {
        // not even diagonalisable over the fraction field
        return Ok(Diagonalisability::NotDiagonalisable);
    }
    if total > r {
        return Ok(Diagonalisability::Undecided(format!(
            "eigenlattice ranks sum to {total} > {r}; eigenspaces overlap at working precision"
        )));
    }
    let mut joint = ModelMatrix::zeros(a.params(), r, 0);
    for l in &lats {
        joint = joint.hcat(l)?;
    }
    Ok(Diagonalisability::from_bool(joint.residue().rank() == r))
}

/// Direct test: the saturated eigenlattices of `[pi]` on each `omega_v` must
/// reduce to independent subspaces spanning the reduction of `omega_v`.
pub fn pi_diagonalisable_direct(datum: &StructuredDatum) -> Result<Diagonalisability> {
    let tp = datum
        .tau_pi
        .as_ref()
        .ok_or_else(|| Error::Missing("tau_pi".into()))?;
    let ms = datum
        .pi_on_omega
        .as_ref()
        .ok_or_else(|| Error::Missing("pi_on_omega".into()))?;
    let mut verdict = Diagonalisability::Diagonalisable;
    for (a, taus) in ms.iter().zip(tp) {
        match direct_block(a, taus).or_else(undecided)? {
            Diagonalisability::NotDiagonalisable => return Ok(Diagonalisability::NotDiagonalisable),
            u @ Diagonalisability::Undecided(_) => verdict = u,
            Diagonalisability::Diagonalisable => {}
        }
    }
    Ok(verdict)
}

/// Slope criterion for tame `F`: `r_v <= n` and
/// `Hdg^int_v = (1/e, ..., 1/e, 0, ..., 0)` with `r_v` entries `1/e`.
pub fn pi_diagonalisable_criterion(datum: &StructuredDatum) -> Result<bool> {
    let hi = integral_hodge(datum)?;
    let ranks = datum.r_upsilon().expect("integral_hodge needs pi_on_omega");
    Ok(ranks.iter().zip(&hi.per_upsilon).all(|(&r, poly)| {
        r <= datum.n && *poly == pattern(r, datum.e, datum.n)
    }))
}

fn pattern(r: usize, e: usize, n: usize) -> Polygon {
    let mut slopes = vec![rational(1, e as i64); r];
    slopes.resize(n, Rational::from_integer(0.into()));
    Polygon::new(slopes).expect("nonincreasing by construction")
}

/// Whether `F` is tamely ramified, `p` not dividing `e`.
pub fn is_tame(datum: &StructuredDatum) -> bool {
    (datum.e as u64).gcd(&datum.p()) == 1
}

/// Uses the slope criterion when `F` is tame, the direct test otherwise.
pub fn is_pi_diagonalisable(datum: &StructuredDatum) -> Result<Diagonalisability> {
    if datum.tau_pi.is_none() {
        return Err(Error::Missing("tau_pi".into()));
    }
    if is_tame(datum) {
        return match pi_diagonalisable_criterion(datum) {
            Ok(b) => Ok(Diagonalisability::from_bool(b)),
            Err(e) => undecided(e),
        };
    }
    pi_diagonalisable_direct(datum)
}
