//! One-parameter families of data: evaluation at a point of the valuation
//! interval, sweeps of the integral Hodge polygon with exact piecewise-affine
//! fits, and sublevel regions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::invariants::{integral_hodge, StructuredDatum};
use crate::lattice::ModelMatrix;
use crate::polygon::poly_leq;
use crate::ring::{parse_shorthand, ModelRingParams, RingElem};
use crate::{rational, Polygon, Rational};

/// An interval of `s`, each end open or closed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn open(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn contains(&self, s: &Rational) -> bool {
        let above = if self.lo_closed { *s >= self.lo } else { *s > self.lo };
        let below = if self.hi_closed { *s <= self.hi } else { *s < self.hi };
        above && below
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// `constant + slope * s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Affine {
    pub constant: Rational,
    pub slope: Rational,
}

impl Affine {
    pub fn new(constant: Rational, slope: Rational) -> Self {
        Affine { constant, slope }
    }

    pub fn eval(&self, s: &Rational) -> Rational {
        &self.constant + &self.slope * s
    }

    /// Line through two points with distinct abscissae.
    fn through(a: (&Rational, &Rational), b: (&Rational, &Rational)) -> Self {
        let slope = (b.1 - a.1) / (b.0 - a.0);
        let constant = a.1 - &slope * a.0;
        Affine { constant, slope }
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one = Rational::one();
        let term = |c: &Rational| if *c == one { "s".to_string() } else { format!("{c}*s") };
        match (self.constant.is_zero(), self.slope.is_zero()) {
            (_, true) => write!(f, "{}", self.constant),
            (true, false) if self.slope.is_negative() => write!(f, "-{}", term(&-&self.slope)),
            (true, false) => write!(f, "{}", term(&self.slope)),
            (false, false) if self.slope.is_negative() => {
                write!(f, "{} - {}", self.constant, term(&-&self.slope))
            }
            _ => write!(f, "{} + {}", self.constant, term(&self.slope)),
        }
    }
}

/// `c * u^a * prod_k T_k^{m_k}`, with `a` measured as a valuation (`v(p) = 1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    /// Constant factor, in shorthand (no `u`).
    pub c: String,
    pub u: Rational,
    pub powers: BTreeMap<String, u32>,
}

/// One matrix entry of a family template.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EntryTemplate {
    /// A constant in shorthand (no `u`), e.g. `"1"`, `"-p"`.
    Fixed(String),
    Mono(Monomial),
}

pub type MatrixTemplate = Vec<Vec<EntryTemplate>>;

/// A datum whose `[pi]` entries depend on parameters `T_k` with valuations
/// affine in one free variable `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyDatum {
    pub p: u64,
    pub residue_degree: usize,
    pub residue_poly: Option<Vec<i64>>,
    pub precision: u32,
    pub e: usize,
    pub f: usize,
    pub n: usize,
    pub pi_on_omega: Vec<MatrixTemplate>,
    pub r_tau: Option<Vec<usize>>,
    pub params: Vec<String>,
    /// `v(T_k)` as an affine function of `s`.
    pub constraints: BTreeMap<String, Affine>,
    pub domain: Interval,
}

fn has_u(s: &str) -> bool {
    s.contains('u')
}

impl FamilyDatum {
    fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.pi_on_omega.iter().flatten().flatten().filter_map(|e| match e {
            EntryTemplate::Mono(m) => Some(m),
            EntryTemplate::Fixed(_) => None,
        })
    }

    /// Structural checks: declared parameters, constraints nonnegative on the
    /// domain, nonnegative entry valuations.
    pub fn validate(&self) -> Result<()> {
        if self.domain.lo >= self.domain.hi {
            return Err(Error::Validation(format!("empty domain {}", self.domain)));
        }
        for name in &self.params {
            if !self.constraints.contains_key(name) {
                return Err(Error::Validation(format!("parameter {name} has no constraint")));
            }
        }
        for name in self.constraints.keys() {
            if !self.params.contains(name) {
                return Err(Error::Validation(format!("constraint on undeclared parameter {name}")));
            }
        }
        let ends = [&self.domain.lo, &self.domain.hi];
        for (name, a) in &self.constraints {
            if ends.iter().any(|s| a.eval(s).is_negative()) {
                return Err(Error::Validation(format!(
                    "v({name}) = {a} becomes negative on {}",
                    self.domain
                )));
            }
        }
        for entry in self.pi_on_omega.iter().flatten().flatten() {
            let c = match entry {
                EntryTemplate::Fixed(c) => c,
                EntryTemplate::Mono(m) => {
                    if m.u.is_negative() {
                        return Err(Error::Validation(format!("negative u-valuation {}", m.u)));
                    }
                    if let Some(k) = m.powers.keys().find(|k| !self.params.contains(k)) {
                        return Err(Error::Validation(format!("monomial uses undeclared parameter {k}")));
                    }
                    &m.c
                }
            };
            if has_u(c) {
                return Err(Error::Validation(format!(
                    "constant {c:?} mentions u; write powers of u through the monomial's u-valuation"
                )));
            }
        }
        Ok(())
    }

    /// Valuation of each monomial at `s`.
    fn valuation(&self, m: &Monomial, s: &Rational) -> Rational {
        m.powers.iter().fold(m.u.clone(), |acc, (k, &pw)| {
            acc + self.constraints[k].eval(s) * rational(pw as i64, 1)
        })
    }

    /// Smallest `N` making every entry valuation at `s` integral in `u`-units.
    pub fn ram_index_at(&self, s: &Rational) -> Result<u32> {
        let mut n = num_bigint::BigInt::one();
        for m in self.monomials() {
            n = n.lcm(self.valuation(m, s).denom());
        }
        n.to_u32()
            .filter(|&v| v <= MAX_RAM_INDEX)
            .ok_or_else(|| Error::OutOfDomain(format!("{s} needs a ramification index {n} above {MAX_RAM_INDEX}")))
    }

    /// `dim H / d`, independent of `s`.
    pub fn endpoint(&self) -> Rational {
        let h: usize = self.pi_on_omega.iter().map(Vec::len).sum();
        rational(h as i64, (self.e * self.f) as i64)
    }
}

/// Largest ramification index an instantiation may use.
pub const MAX_RAM_INDEX: u32 = 4096;

/// The concrete datum at `s`: `T_k -> u^{N v(T_k)(s)}` with `N` the least
/// common denominator of the entry valuations.
pub fn instantiate(fam: &FamilyDatum, s: &Rational) -> Result<StructuredDatum> {
    if !fam.domain.contains(s) {
        return Err(Error::OutOfDomain(format!("{s} is not in {}", fam.domain)));
    }
    let big_n = fam.ram_index_at(s)?;
    let model = ModelRingParams::new(fam.p, fam.residue_degree, big_n, fam.precision, fam.residue_poly.clone())?;
    let nr = rational(big_n as i64, 1);
    let build = |t: &MatrixTemplate| -> Result<ModelMatrix> {
        let rows = t
            .iter()
            .map(|row| {
                row.iter()
                    .map(|entry| match entry {
                        EntryTemplate::Fixed(c) => parse_shorthand(&model, c),
                        EntryTemplate::Mono(m) => {
                            let v = fam.valuation(m, s);
                            if v.is_negative() {
                                return Err(Error::OutOfDomain(format!("entry valuation {v} < 0 at s = {s}")));
                            }
                            let k = (v * &nr).to_integer().to_u32().ok_or_else(|| {
                                Error::OutOfDomain(format!("u-exponent too large at s = {s}"))
                            })?;
                            Ok(&parse_shorthand(&model, &m.c)? * &RingElem::u_pow(&model, k))
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        ModelMatrix::from_rows(&model, rows)
    };
    let blocks = fam.pi_on_omega.iter().map(build).collect::<Result<Vec<_>>>()?;
    let mut d = StructuredDatum::empty(&model, fam.e, fam.f, fam.n);
    d.pi_on_omega = Some(blocks);
    d.r_tau = fam.r_tau.clone();
    Ok(d)
}

/// `Hdg^int` at `s`, after validating the instantiated datum.
pub fn integral_hodge_at(fam: &FamilyDatum, s: &Rational) -> Result<Polygon> {
    let d = instantiate(fam, s)?;
    d.validate()?;
    Ok(integral_hodge(&d)?.averaged)
}

/// One affine piece of a fitted slope function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffinePiece {
    pub lo: Rational,
    pub hi: Rational,
    pub line: Affine,
}

/// A continuous or discontinuous piecewise-affine function of `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseAffine {
    pub pieces: Vec<AffinePiece>,
}

impl PiecewiseAffine {
    /// Value at `s`; at a shared break the left piece wins.
    pub fn eval(&self, s: &Rational) -> Rational {
        let piece = self
            .pieces
            .iter()
            .find(|p| *s <= p.hi)
            .or(self.pieces.last())
            .expect("at least one piece");
        piece.line.eval(s)
    }

    pub fn breaks(&self) -> Vec<Rational> {
        self.pieces.iter().skip(1).map(|p| p.lo.clone()).collect()
    }
}

impl fmt::Display for PiecewiseAffine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{} on [{}, {}]", p.line, p.lo, p.hi)?;
        }
        Ok(())
    }
}

/// Continuity verdict of a sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Continuity {
    Continuous,
    /// Adjacent pieces do not meet between the given samples.
    Discontinuous { between: (Rational, Rational) },
    /// The refinement cap was reached before every piece was confirmed.
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepResult {
    /// Sorted by `s`.
    pub samples: Vec<(Rational, Polygon)>,
    /// One model per slope `lambda_i(s)`.
    pub fitted: Vec<PiecewiseAffine>,
    pub continuity: Continuity,
}

impl SweepResult {
    pub fn continuity_ok(&self) -> bool {
        self.continuity == Continuity::Continuous
    }
}

/// Extra refinement rounds before giving up on a junction.
pub const REFINEMENT_ROUNDS: usize = 8;

/// `grid + 1` interior points `lo + w (2j + 1) / (2 (grid + 1))`, plus any
/// closed end of the domain.
pub fn sample_points(domain: &Interval, grid: usize) -> Vec<Rational> {
    let w = domain.width();
    let den = rational(2 * (grid as i64 + 1), 1);
    let mut out: Vec<Rational> = (0..=grid)
        .map(|j| &domain.lo + &w * rational(2 * j as i64 + 1, 1) / &den)
        .collect();
    if domain.lo_closed {
        out.insert(0, domain.lo.clone());
    }
    if domain.hi_closed {
        out.push(domain.hi.clone());
    }
    out
}

/// A maximal run of collinear samples `start..=end` and its line.
struct Run {
    start: usize,
    end: usize,
    line: Affine,
}

fn runs(xs: &[Rational], ys: &[Rational]) -> Vec<Run> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < xs.len() {
        if i + 1 == xs.len() {
            out.push(Run { start: i, end: i, line: Affine::new(ys[i].clone(), Rational::zero()) });
            break;
        }
        let line = Affine::through((&xs[i], &ys[i]), (&xs[i + 1], &ys[i + 1]));
        let mut j = i + 1;
        while j + 1 < xs.len() && line.eval(&xs[j + 1]) == ys[j + 1] {
            j += 1;
        }
        out.push(Run { start: i, end: j, line });
        i = j + 1;
    }
    out
}

enum Fit {
    Done(PiecewiseAffine),
    /// Points to sample before the fit can be trusted.
    Refine(Vec<Rational>),
    Jump(Rational, Rational),
}

fn mid(a: &Rational, b: &Rational) -> Rational {
    (a + b) / rational(2, 1)
}

/// Fits one slope function; pieces need three collinear samples, and two
/// pieces must meet at a sampled point between their supports.
fn fit(xs: &[Rational], ys: &[Rational], domain: &Interval) -> Fit {
    let rs = runs(xs, ys);
    let mut refine = Vec::new();
    for (k, r) in rs.iter().enumerate() {
        if r.end - r.start + 1 < 3 && rs.len() > 1 {
            if r.start > 0 {
                refine.push(mid(&xs[r.start - 1], &xs[r.start]));
            }
            if r.end > r.start {
                refine.push(mid(&xs[r.start], &xs[r.end]));
            }
            if r.end + 1 < xs.len() {
                refine.push(mid(&xs[r.end], &xs[r.end + 1]));
            }
        }
        let Some(next) = rs.get(k + 1) else { continue };
        let (a, b) = (&xs[r.end], &xs[next.start]);
        let ds = &r.line.slope - &next.line.slope;
        if ds.is_zero() {
            if r.line == next.line {
                continue;
            }
            if refine.is_empty() && b - a <= min_gap(domain) {
                return Fit::Jump(a.clone(), b.clone());
            }
            refine.push(mid(a, b));
            continue;
        }
        let cross = (&next.line.constant - &r.line.constant) / ds;
        if cross < *a || cross > *b {
            if refine.is_empty() && b - a <= min_gap(domain) {
                return Fit::Jump(a.clone(), b.clone());
            }
            refine.push(mid(a, b));
        } else if cross != *a && cross != *b {
            refine.push(cross);
        }
    }
    if !refine.is_empty() {
        return Fit::Refine(refine);
    }
    let mut pieces: Vec<AffinePiece> = Vec::with_capacity(rs.len());
    for r in &rs {
        let lo = match pieces.last() {
            None => domain.lo.clone(),
            Some(_) => {
                // the break is the previous run's last sample
                xs[r.start - 1].clone()
            }
        };
        if let Some(last) = pieces.last_mut() {
            last.hi = lo.clone();
        }
        pieces.push(AffinePiece { lo, hi: domain.hi.clone(), line: r.line.clone() });
    }
    Fit::Done(PiecewiseAffine { pieces })
}

/// Below this gap a persistent mismatch counts as a jump.
fn min_gap(domain: &Interval) -> Rational {
    domain.width() / rational(1 << 12, 1)
}

/// Samples `Hdg^int` over the domain and fits each slope exactly.
pub fn sweep(fam: &FamilyDatum, grid: usize) -> Result<SweepResult> {
    if grid < 2 {
        return Err(Error::Validation(format!("grid must be at least 2, got {grid}")));
    }
    fam.validate()?;
    let mut samples: BTreeMap<Rational, Polygon> = BTreeMap::new();
    let mut pending: BTreeSet<Rational> = sample_points(&fam.domain, grid).into_iter().collect();
    let n = fam.n;
    for _round in 0..=REFINEMENT_ROUNDS {
        for s in std::mem::take(&mut pending) {
            if let std::collections::btree_map::Entry::Vacant(slot) = samples.entry(s) {
                let poly = integral_hodge_at(fam, slot.key())?;
                slot.insert(poly);
            }
        }
        let xs: Vec<Rational> = samples.keys().cloned().collect();
        let mut fitted = Vec::with_capacity(n);
        let mut jump = None;
        for i in 0..n {
            let ys: Vec<Rational> = samples.values().map(|p| p.slopes()[i].clone()).collect();
            match fit(&xs, &ys, &fam.domain) {
                Fit::Done(m) => fitted.push(m),
                Fit::Refine(pts) => pending.extend(pts.into_iter().filter(|s| fam.domain.contains(s))),
                Fit::Jump(a, b) => jump = Some((a, b)),
            }
        }
        if pending.is_empty() {
            let samples: Vec<(Rational, Polygon)> = samples.into_iter().collect();
            let continuity = match jump {
                Some(between) => Continuity::Discontinuous { between },
                None => Continuity::Continuous,
            };
            if continuity == Continuity::Continuous {
                check_reproduces(&samples, &fitted)?;
            }
            return Ok(SweepResult { samples, fitted, continuity });
        }
    }
    let samples: Vec<(Rational, Polygon)> = samples.into_iter().collect();
    Ok(SweepResult { samples, fitted: Vec::new(), continuity: Continuity::Undecided })
}

fn check_reproduces(samples: &[(Rational, Polygon)], fitted: &[PiecewiseAffine]) -> Result<()> {
    for (s, poly) in samples {
        for (i, m) in fitted.iter().enumerate() {
            if m.eval(s) != poly.slopes()[i] {
                return Err(Error::InternalMismatch(format!(
                    "fitted slope {i} gives {} at s = {s}, sample has {}",
                    m.eval(s),
                    poly.slopes()[i]
                )));
            }
        }
    }
    Ok(())
}

/// `{s : Hdg^int(s) <= f0}` with any warnings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SublevelRegion {
    pub intervals: Vec<Interval>,
    pub warnings: Vec<String>,
}

/// Solves the prefix-sum inequalities of `Hdg^int(s) <= f0` on the fitted model.
pub fn sublevel_region(fam: &FamilyDatum, f0: &Polygon, grid: usize) -> Result<SublevelRegion> {
    if f0.len() != fam.n {
        return Err(Error::LengthMismatch(f0.len(), fam.n));
    }
    if f0.total() != fam.endpoint() {
        let e = Error::EndpointMismatch {
            got: f0.total().to_string(),
            expected: fam.endpoint().to_string(),
        };
        return Ok(SublevelRegion { intervals: Vec::new(), warnings: vec![e.to_string()] });
    }
    let sw = sweep(fam, grid)?;
    if !sw.continuity_ok() {
        return Err(Error::Validation(format!(
            "the sweep is not known to be continuous ({:?}); no exact region",
            sw.continuity
        )));
    }
    let dom = &fam.domain;
    let mut cuts: BTreeSet<Rational> = [dom.lo.clone(), dom.hi.clone()].into_iter().collect();
    for m in &sw.fitted {
        cuts.extend(m.breaks());
    }
    let cuts: Vec<Rational> = cuts.into_iter().collect();
    let targets = f0.prefix_sums();
    let mut pieces: Vec<(Rational, Rational)> = Vec::new();
    for w in cuts.windows(2) {
        let (t0, t1) = (&w[0], &w[1]);
        let mut lo = t0.clone();
        let mut hi = t1.clone();
        let mut empty = false;
        for (k, c) in targets.iter().enumerate().take(fam.n).skip(1) {
            // on [t0, t1] the prefix sum is affine; evaluate slightly inside
            // to avoid the left-piece convention at shared breaks
            let (p0, p1) = (eval_right(&sw.fitted[..k], t0), eval_left(&sw.fitted[..k], t1));
            let line = Affine::through((t0, &p0), (t1, &p1));
            match (line.slope.is_zero(), line.slope.is_positive()) {
                (true, _) => {
                    if line.constant > *c {
                        empty = true;
                    }
                }
                (false, true) => hi = hi.min((c - &line.constant) / &line.slope),
                (false, false) => lo = lo.max((c - &line.constant) / &line.slope),
            }
        }
        if !empty && lo <= hi {
            pieces.push((lo, hi));
        }
    }
    // merge touching pieces
    let mut merged: Vec<(Rational, Rational)> = Vec::new();
    for (lo, hi) in pieces {
        match merged.last_mut() {
            Some(last) if last.1 >= lo => last.1 = last.1.clone().max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    let intervals: Vec<Interval> = merged
        .into_iter()
        .map(|(lo, hi)| Interval {
            lo_closed: !(lo == dom.lo && !dom.lo_closed),
            hi_closed: !(hi == dom.hi && !dom.hi_closed),
            lo,
            hi,
        })
        .collect();
    for iv in &intervals {
        for end in [&iv.lo, &iv.hi] {
            if dom.contains(end) && !poly_leq(&integral_hodge_at(fam, end)?, f0)? {
                return Err(Error::InternalMismatch(format!(
                    "region end point {end} violates Hdg^int <= {f0}"
                )));
            }
        }
    }
    Ok(SublevelRegion { intervals, warnings: Vec::new() })
}

fn eval_right(ms: &[PiecewiseAffine], s: &Rational) -> Rational {
    ms.iter()
        .map(|m| {
            let p = m.pieces.iter().find(|p| *s < p.hi).or(m.pieces.last()).expect("nonempty");
            p.line.eval(s)
        })
        .sum()
}

fn eval_left(ms: &[PiecewiseAffine], s: &Rational) -> Rational {
    ms.iter().map(|m| m.eval(s)).sum()
}
