use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lattice::{smith_valuations, ModelMatrix};
use crate::ring::{ModelRingParams, RingElem};
use crate::{rational, Rational};

/// `(height, degree)` of one finite flat subobject, feeding the HN hull.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubobjectRecord {
    pub height: usize,
    pub degree: Rational,
}

impl SubobjectRecord {
    pub fn new(height: usize, degree: Rational) -> Self {
        SubobjectRecord { height, degree }
    }

    fn check(&self) -> Result<()> {
        if self.degree < Rational::zero() || self.degree > rational(self.height as i64, 1) {
            return Err(Error::Validation(format!(
                "subobject of height {} has degree {} outside [0, height]",
                self.height, self.degree
            )));
        }
        Ok(())
    }
}

/// Dieudonné module of the special fibre: `phi = Phi sigma` and the action of
/// `pi`, both on `D = W^{d n}` ordered as `f` consecutive blocks of size `e n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DieudonneData {
    pub phi: ModelMatrix,
    pub pi_on_d: ModelMatrix,
}

/// Matrix-level data of a p-divisible group with `O_F`-action.
///
/// `pi_on_omega[v]` is the matrix of `[pi]` on the `v`-th unramified
/// component of the cotangent module; embeddings `tau` are indexed
/// `0..d`, with `tau` lying over `v = tau / e`.
#[derive(Clone, Debug)]
pub struct StructuredDatum {
    pub model: Arc<ModelRingParams>,
    /// Ramification index `e` of `F`.
    pub e: usize,
    /// Inertia degree `f` of `F`.
    pub f: usize,
    /// `height H = d n`.
    pub n: usize,
    pub pi_on_omega: Option<Vec<ModelMatrix>>,
    /// For each `v`, the `e` conjugates `tau(pi)` with `tau | v`.
    pub tau_pi: Option<Vec<Vec<RingElem>>>,
    /// `r_tau = dim omega_{K, tau}` for the `d` embeddings.
    pub r_tau: Option<Vec<usize>>,
    pub dieudonne: Option<DieudonneData>,
    pub subobjects_p: Option<Vec<SubobjectRecord>>,
    pub subobjects_pi: Option<Vec<SubobjectRecord>>,
    /// Level `i` -> records for `H[p^i]`.
    pub hn_tower: Option<BTreeMap<usize, Vec<SubobjectRecord>>>,
}

impl StructuredDatum {
    /// A datum with no matrices attached yet.
    pub fn empty(model: &Arc<ModelRingParams>, e: usize, f: usize, n: usize) -> Self {
        StructuredDatum {
            model: Arc::clone(model),
            e,
            f,
            n,
            pi_on_omega: None,
            tau_pi: None,
            r_tau: None,
            dieudonne: None,
            subobjects_p: None,
            subobjects_pi: None,
            hn_tower: None,
        }
    }

    pub fn p(&self) -> u64 {
        self.model.p()
    }

    /// `d = e f`.
    pub fn d(&self) -> usize {
        self.e * self.f
    }

    /// `r_v`, the ranks of the unramified components of the cotangent module.
    pub fn r_upsilon(&self) -> Option<Vec<usize>> {
        self.pi_on_omega
            .as_ref()
            .map(|ms| ms.iter().map(ModelMatrix::rows).collect())
    }

    /// `dim H`, from whichever input determines it.
    pub fn dim_h(&self) -> Option<usize> {
        if let Some(r) = self.r_upsilon() {
            return Some(r.iter().sum());
        }
        if let Some(r) = &self.r_tau {
            return Some(r.iter().sum());
        }
        let dd = self.dieudonne.as_ref()?;
        let phibar = dd.phi.residue();
        Some(self.d() * self.n - phibar.rank())
    }

    /// `dim H / d`, the common end point of every polygon.
    pub fn endpoint(&self) -> Option<Rational> {
        self.dim_h().map(|h| rational(h as i64, self.d() as i64))
    }

    /// Checks every structural constraint; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if self.e == 0 || self.f == 0 {
            return Err(Error::Validation("e and f must be positive".into()));
        }
        if let Some(ms) = &self.pi_on_omega {
            self.validate_omega(ms)?;
        }
        if let Some(r) = &self.r_tau {
            self.validate_r_tau(r)?;
        }
        if let Some(tp) = &self.tau_pi {
            self.validate_tau_pi(tp)?;
        }
        if let Some(dd) = &self.dieudonne {
            self.validate_dieudonne(dd, &mut warnings)?;
        }
        for recs in [&self.subobjects_p, &self.subobjects_pi].into_iter().flatten() {
            recs.iter().try_for_each(SubobjectRecord::check)?;
        }
        if let Some(tower) = &self.hn_tower {
            for recs in tower.values() {
                recs.iter().try_for_each(SubobjectRecord::check)?;
            }
            if tower.contains_key(&0) {
                return Err(Error::Validation("hn tower levels start at 1".into()));
            }
        }
        if self.pi_on_omega.is_some() && self.dieudonne.is_some() {
            let a = super::hodge_special_fibre(self, super::HodgeSource::Omega)?;
            let b = super::hodge_special_fibre(self, super::HodgeSource::Dieudonne)?;
            if a != b {
                return Err(Error::Validation(format!(
                    "Hodge polygon from the cotangent data {a} differs from the Dieudonne data {b}"
                )));
            }
        }
        Ok(warnings)
    }

    fn validate_omega(&self, ms: &[ModelMatrix]) -> Result<()> {
        if ms.len() != self.f {
            return Err(Error::Validation(format!(
                "{} cotangent blocks given, expected f = {}",
                ms.len(),
                self.f
            )));
        }
        for (v, a) in ms.iter().enumerate() {
            if !a.is_square() {
                return Err(Error::Validation(format!("block {v} of [pi] is not square")));
            }
            let r = a.rows();
            if r > self.e * self.n {
                return Err(Error::NotRealizable(format!(
                    "rank {r} of block {v} exceeds e n = {}",
                    self.e * self.n
                )));
            }
            let ed = smith_valuations(a)?;
            if ed.rank_deficit > 0 {
                return Err(Error::precision(format!(
                    "det of [pi] on block {v} vanishes at working precision"
                )));
            }
            let expect = rational(r as i64, self.e as i64);
            if ed.total() != expect {
                return Err(Error::Validation(format!(
                    "v(det [pi]) on block {v} is {}, expected r/e = {expect}",
                    ed.total()
                )));
            }
            if let Some(big) = ed.vals.iter().find(|x| **x > Rational::one()) {
                return Err(Error::Validation(format!(
                    "[pi] on block {v} has an elementary divisor of valuation {big} > 1, so p does not kill its cokernel"
                )));
            }
        }
        Ok(())
    }

    fn validate_r_tau(&self, r: &[usize]) -> Result<()> {
        if r.len() != self.d() {
            return Err(Error::Validation(format!(
                "{} values of r_tau given, expected d = {}",
                r.len(),
                self.d()
            )));
        }
        if let Some(&bad) = r.iter().find(|&&x| x > self.n) {
            return Err(Error::RTauOutOfRange { value: bad, n: self.n });
        }
        if let Some(ru) = self.r_upsilon() {
            for (v, chunk) in r.chunks(self.e).enumerate() {
                let s: usize = chunk.iter().sum();
                if s != ru[v] {
                    return Err(Error::Validation(format!(
                        "r_tau over block {v} sum to {s}, but the block has rank {}",
                        ru[v]
                    )));
                }
            }
        }
        Ok(())
    }

    fn validate_tau_pi(&self, tp: &[Vec<RingElem>]) -> Result<()> {
        if tp.len() != self.f || tp.iter().any(|l| l.len() != self.e) {
            return Err(Error::Validation(format!(
                "tau_pi must list e = {} conjugates for each of the f = {} blocks",
                self.e, self.f
            )));
        }
        let want = rational(1, self.e as i64);
        for (v, list) in tp.iter().enumerate() {
            for (i, t) in list.iter().enumerate() {
                if t.valuation() != Some(want.clone()) {
                    return Err(Error::Validation(format!(
                        "tau_pi[{v}][{i}] has valuation {:?}, expected 1/e",
                        t.valuation().map(|x| x.to_string())
                    )));
                }
                for (j, s) in list.iter().enumerate().skip(i + 1) {
                    if (t - s).is_zero() {
                        return Err(Error::Validation(format!(
                            "tau_pi[{v}][{i}] and tau_pi[{v}][{j}] coincide"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_dieudonne(&self, dd: &DieudonneData, warnings: &mut Vec<String>) -> Result<()> {
        let size = self.d() * self.n;
        for (name, m) in [("phi", &dd.phi), ("pi_on_D", &dd.pi_on_d)] {
            if m.rows() != size || m.cols() != size {
                return Err(Error::Validation(format!(
                    "{name} is {}x{}, expected {size}x{size}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        let blk = self.e * self.n;
        for a in 0..self.f {
            for b in 0..self.f {
                if a != b && !dd.pi_on_d.block(a * blk, b * blk, blk, blk).is_zero() {
                    return Err(Error::Validation(format!(
                        "pi_on_D mixes blocks {b} -> {a}"
                    )));
                }
            }
        }
        let lhs = dd.pi_on_d.try_mul(&dd.phi)?;
        let rhs = dd.phi.try_mul(&dd.pi_on_d.frobenius())?;
        if !lhs.try_sub(&rhs)?.is_zero() {
            return Err(Error::Validation("pi does not commute with phi".into()));
        }
        let ed = smith_valuations(&dd.phi)?;
        if ed.rank_deficit > 0 {
            warnings.push("cannot decide p D ⊆ phi D: phi is singular at working precision".into());
        } else if let Some(big) = ed.vals.iter().find(|x| **x > Rational::one()) {
            return Err(Error::Validation(format!(
                "phi has an elementary divisor of valuation {big} > 1, so p D is not inside phi D"
            )));
        }
        Ok(())
    }
}
