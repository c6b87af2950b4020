//! Seeded generators of valid data, used by the property suites and by
//! `polyinv check --trials`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{StructuredDatum, SubobjectRecord};
use crate::error::{Error, Result};
use crate::lattice::ModelMatrix;
use crate::ring::{ModelRingParams, RingElem};
use crate::{rational, Polygon, Rational};

/// How the off-diagonal blocks of a generated `[pi]` are filled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coupling {
    Diagonal,
    Mixed,
    Generic,
}

const MAX_ATTEMPTS: usize = 32;
const MIXED_ATTEMPTS: usize = 8;

/// Working precision `M` of generated data.
pub const RANDOM_PRECISION: u32 = 8;

/// `(p, residue degree of the model)` admitting the `e`-th roots of unity
/// needed for the conjugates `zeta^i pi`.
fn prime_for<R: Rng + ?Sized>(rng: &mut R, e: usize) -> (u64, usize) {
    match e {
        1 | 2 => (*[2, 3, 5].choose(rng).expect("nonempty"), 1),
        _ => *[(2, 2), (5, 2), (7, 1)].choose(rng).expect("nonempty"),
    }
}

fn primitive_root(model: &std::sync::Arc<ModelRingParams>, e: usize) -> Result<RingElem> {
    match e {
        1 => Ok(RingElem::one(model)),
        2 => Ok(RingElem::from_int(model, -1)),
        _ => RingElem::root_of_unity(model, e as u64)
            .ok_or_else(|| Error::InvalidParams(format!("no primitive {e}-th root of unity in the model"))),
    }
}

/// Conjugates `zeta^i u^{N/e}` of a uniformiser with `pi^e = p`.
pub fn conjugates(model: &std::sync::Arc<ModelRingParams>, e: usize) -> Result<Vec<RingElem>> {
    let k = model.ram_index() / e as u32;
    let pi = RingElem::u_pow(model, k);
    let zeta = primitive_root(model, e)?;
    Ok((0..e).map(|i| &zeta.pow(i as u128) * &pi).collect())
}

fn random_entry<R: Rng + ?Sized>(rng: &mut R, model: &std::sync::Arc<ModelRingParams>, generic: bool) -> RingElem {
    if generic {
        return RingElem::random(model, rng, 0);
    }
    if rng.gen_bool(1.0 / 3.0) {
        return RingElem::zero(model);
    }
    let shift = rng.gen_range(0..=model.ram_index());
    RingElem::random(model, rng, shift)
}

/// Conjugates `a` by a random product of elementary matrices and swaps.
pub fn scramble<R: Rng + ?Sized>(rng: &mut R, a: &ModelMatrix, steps: usize) -> ModelMatrix {
    let mut m = a.clone();
    let r = m.rows();
    if r < 2 {
        return m;
    }
    let model = a.params().clone();
    for _ in 0..steps {
        let i = rng.gen_range(0..r);
        let j = (i + rng.gen_range(1..r)) % r;
        if rng.gen_bool(0.2) {
            m.swap_rows(i, j);
            m.swap_cols(i, j);
        } else {
            let t = RingElem::random(&model, rng, 0);
            m.row_axpy(i, &t, j);
            m.col_axpy(j, &-&t, i);
        }
    }
    m
}

/// `[pi]` on one `omega_v`: block triangular with scalar blocks `tau_i I_{r_i}`,
/// then scrambled. Semisimple with eigenvalue multiplicities `r`.
///
/// `Diagonal` leaves the off-diagonal blocks zero, `Generic` fills them with
/// uniform integral entries, `Mixed` with entries of random valuation (some zero).
pub fn random_block<R: Rng + ?Sized>(
    rng: &mut R,
    model: &std::sync::Arc<ModelRingParams>,
    taus: &[RingElem],
    r: &[usize],
    coupling: Coupling,
) -> ModelMatrix {
    let size: usize = r.iter().sum();
    let mut m = ModelMatrix::zeros(model, size, size);
    let mut owner = Vec::with_capacity(size);
    for (i, &ri) in r.iter().enumerate() {
        owner.extend(std::iter::repeat_n(i, ri));
    }
    for a in 0..size {
        m.set(a, a, taus[owner[a]].clone());
        if coupling == Coupling::Diagonal {
            continue;
        }
        for b in a + 1..size {
            if owner[b] != owner[a] {
                m.set(a, b, random_entry(rng, model, coupling == Coupling::Generic));
            }
        }
    }
    let steps = 2 * size;
    scramble(rng, &m, steps)
}

/// A random valid datum with `e` in 1..=3, `f` in 1..=2, `n` in 1..=3.
///
/// Each `[pi]` is semisimple with eigenvalues among genuine conjugates of a
/// uniformiser, so `[pi]^e = p` and every elementary divisor is at most 1.
pub fn random_datum<R: Rng + ?Sized>(rng: &mut R) -> Result<StructuredDatum> {
    let e = rng.gen_range(1..=3);
    let f = rng.gen_range(1..=2);
    let n = rng.gen_range(1..=3);
    random_datum_with(rng, e, f, n)
}

pub fn random_datum_with<R: Rng + ?Sized>(rng: &mut R, e: usize, f: usize, n: usize) -> Result<StructuredDatum> {
    let (p, fres) = prime_for(rng, e);
    let k = rng.gen_range(1..=2);
    let model = ModelRingParams::new(p, fres, (e * k) as u32, RANDOM_PRECISION, None)?;
    let taus = conjugates(&model, e)?;
    let diagonal = rng.gen_bool(0.25);
    let mut blocks = Vec::with_capacity(f);
    let mut r_tau = Vec::with_capacity(e * f);
    for _ in 0..f {
        let r: Vec<usize> = (0..e).map(|_| rng.gen_range(0..=n)).collect();
        let size: usize = r.iter().sum();
        // the reduction must have a kernel of dimension at most n
        let mut block = None;
        for attempt in 0..MAX_ATTEMPTS {
            let coupling = match attempt {
                0 if diagonal => Coupling::Diagonal,
                a if a >= MIXED_ATTEMPTS => Coupling::Generic,
                _ => Coupling::Mixed,
            };
            let a = random_block(rng, &model, &taus, &r, coupling);
            if size - a.residue().rank() <= n {
                block = Some(a);
                break;
            }
        }
        let block = block.ok_or_else(|| {
            Error::NotRealizable(format!("no realizable [pi] found for multiplicities {r:?} and n = {n}"))
        })?;
        blocks.push(block);
        r_tau.extend(r);
    }
    let mut datum = StructuredDatum::empty(&model, e, f, n);
    datum.pi_on_omega = Some(blocks);
    datum.tau_pi = Some(vec![taus; f]);
    datum.r_tau = Some(r_tau);
    Ok(datum)
}

/// Replaces `(x_i, x_j)` by a convex combination moving them together.
fn t_transform<R: Rng + ?Sized>(rng: &mut R, xs: &mut [Rational]) {
    if xs.len() < 2 {
        return;
    }
    let i = rng.gen_range(0..xs.len());
    let j = (i + rng.gen_range(1..xs.len())) % xs.len();
    let t = rational(rng.gen_range(0..=4), 4);
    let (a, b) = (xs[i].clone(), xs[j].clone());
    let s = Rational::one() - &t;
    xs[i] = &t * &a + &s * &b;
    xs[j] = &s * &a + &t * &b;
}

fn majorised<R: Rng + ?Sized>(rng: &mut R, xs: &[Rational]) -> Vec<Rational> {
    let mut out = xs.to_vec();
    for _ in 0..rng.gen_range(0..=3) {
        t_transform(rng, &mut out);
    }
    out
}

fn subset_records(layers: &[Vec<Rational>], f: usize) -> Vec<SubobjectRecord> {
    let pieces: Vec<&Rational> = layers.iter().flatten().collect();
    let fr = rational(f as i64, 1);
    let mut out = Vec::new();
    for mask in 1u32..(1 << pieces.len()) - 1 {
        let mut h = 0;
        let mut deg = Rational::zero();
        for (b, x) in pieces.iter().enumerate() {
            if mask >> b & 1 == 1 {
                h += f;
                deg += *x * &fr;
            }
        }
        out.push(SubobjectRecord::new(h, deg));
    }
    out
}

/// Subobject records of a diagonal tower below `hi`.
///
/// `H[pi]` splits into `n` pieces of height `f` whose slopes are majorised
/// by `hi`; `H[p]` is filtered by `e` copies of `H[pi]`-like layers, each
/// majorised by the former. Returns `(records for H[p], records for H[pi])`.
pub fn random_hn_records<R: Rng + ?Sized>(
    rng: &mut R,
    datum: &StructuredDatum,
    hi: &Polygon,
) -> (Vec<SubobjectRecord>, Vec<SubobjectRecord>) {
    let mu = majorised(rng, hi.slopes());
    let layers: Vec<Vec<Rational>> = (0..datum.e).map(|_| majorised(rng, &mu)).collect();
    (subset_records(&layers, datum.f), subset_records(&[mu], datum.f))
}

/// A tower whose level `i` records are the level-1 records scaled by `i`.
pub fn proportional_tower(records: &[SubobjectRecord], levels: usize) -> BTreeMap<usize, Vec<SubobjectRecord>> {
    (1..=levels)
        .map(|i| {
            let scaled = records
                .iter()
                .map(|r| SubobjectRecord::new(i * r.height, &r.degree * rational(i as i64, 1)))
                .collect();
            (i, scaled)
        })
        .collect()
}
