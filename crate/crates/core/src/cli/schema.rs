//! JSON input documents and their conversion into library types.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{Affine, EntryTemplate, FamilyDatum, Interval, Monomial};
use crate::invariants::{DieudonneData, StructuredDatum, SubobjectRecord};
use crate::lattice::ModelMatrix;
use crate::ring::{parse_shorthand, ModelRingParams, RingElem};
use crate::Rational;

/// Schema version understood by this build.
pub const SCHEMA_VERSION: &str = "1";

/// Default working precision `M` when neither the document nor
/// `POLYINV_PRECISION_M` sets one.
pub const DEFAULT_M: u32 = 24;

pub const PRECISION_ENV: &str = "POLYINV_PRECISION_M";

/// A rational written as `"num/den"`, `"num"`, or a bare integer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalRepr {
    Int(i64),
    Text(String),
}

impl RationalRepr {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            RationalRepr::Int(i) => Ok(Rational::from_integer((*i).into())),
            RationalRepr::Text(s) => parse_rational(s),
        }
    }

    pub fn from_rational(r: &Rational) -> Self {
        RationalRepr::Text(r.to_string())
    }
}

/// Parses `"a/b"` or `"a"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = |reason: &str| Error::Schema { path: String::new(), reason: format!("{s:?}: {reason}") };
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: num_bigint::BigInt = num.parse().map_err(|_| bad("not a rational"))?;
    let den: num_bigint::BigInt = den.parse().map_err(|_| bad("not a rational"))?;
    if den == 0.into() {
        return Err(bad("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub p: u64,
    #[serde(default = "one")]
    pub residue_degree: usize,
    /// `N`; required for data, ignored for families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ram_index: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue_poly: Option<Vec<i64>>,
}

fn one() -> usize {
    1
}

/// `{"c": "1", "u": "5/6", "T": 1}`: every key besides `c` and `u` is a parameter power.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<RationalRepr>,
    #[serde(flatten)]
    pub powers: BTreeMap<String, u32>,
}

/// One matrix entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryDoc {
    Int(i64),
    Shorthand(String),
    Slots {
        slots: Vec<Vec<Coeff>>,
    },
    Mono {
        mono: MonoDoc,
    },
}

/// A slot coefficient: an integer, or a decimal string when it exceeds 64 bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Int(i64),
    Text(String),
}

impl Coeff {
    fn value(&self) -> Result<i128> {
        match self {
            Coeff::Int(i) => Ok(*i as i128),
            Coeff::Text(s) => s.trim().parse().map_err(|_| Error::Schema {
                path: String::new(),
                reason: format!("{s:?} is not an integer coefficient"),
            }),
        }
    }

    fn from_value(v: i128) -> Self {
        i64::try_from(v).map_or_else(|_| Coeff::Text(v.to_string()), Coeff::Int)
    }
}

pub type MatrixDoc = Vec<Vec<EntryDoc>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordDoc {
    pub height: usize,
    pub degree: RationalRepr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DieudonneDoc {
    pub phi: MatrixDoc,
    #[serde(rename = "pi_on_D")]
    pub pi_on_d: MatrixDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumDoc {
    pub e: usize,
    pub f: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi_on_omega: Option<Vec<MatrixDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_pi: Option<Vec<Vec<EntryDoc>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_tau: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dieudonne: Option<DieudonneDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subobjects_p: Option<Vec<RecordDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subobjects_pi: Option<Vec<RecordDoc>>,
    /// Keys are tower levels `i >= 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hn_tower: Option<BTreeMap<String, Vec<RecordDoc>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineDoc {
    #[serde(default = "zero_repr")]
    pub constant: RationalRepr,
    #[serde(default = "zero_repr")]
    pub slope: RationalRepr,
}

fn zero_repr() -> RationalRepr {
    RationalRepr::Int(0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalDoc {
    pub lo: RationalRepr,
    pub hi: RationalRepr,
    #[serde(default)]
    pub lo_closed: bool,
    #[serde(default)]
    pub hi_closed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub e: usize,
    pub f: usize,
    pub n: usize,
    pub pi_on_omega: Vec<MatrixDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_tau: Option<Vec<usize>>,
    /// `v(T) = constant + slope * s` per parameter.
    pub constraints: BTreeMap<String, AffineDoc>,
    pub domain: IntervalDoc,
}

/// A whole input file: a datum or a family over a model ring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    pub version: String,
    pub model: ModelDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datum: Option<DatumDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyDoc>,
}

/// Parses and schema-checks a document; errors carry the JSON path.
pub fn parse_input(text: &[u8]) -> Result<InputDocument> {
    let text = std::str::from_utf8(text).map_err(|e| Error::Schema { path: String::new(), reason: e.to_string() })?;
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: InputDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        reason: e.inner().to_string(),
    })?;
    de.end().map_err(|e| Error::Schema { path: String::new(), reason: e.to_string() })?;
    if doc.version != SCHEMA_VERSION {
        return Err(Error::Schema {
            path: "version".into(),
            reason: format!("unsupported version {:?}, expected {SCHEMA_VERSION:?}", doc.version),
        });
    }
    match (&doc.datum, &doc.family) {
        (Some(_), Some(_)) => Err(Error::Schema {
            path: ".".into(),
            reason: "a document holds either a datum or a family, not both".into(),
        }),
        (None, None) => Err(Error::Schema { path: ".".into(), reason: "missing datum or family".into() }),
        _ => Ok(doc),
    }
}

/// `M` from the document, else the environment, else [`DEFAULT_M`].
pub fn precision_of(model: &ModelDoc) -> Result<u32> {
    if let Some(m) = model.precision {
        return Ok(m);
    }
    match std::env::var(PRECISION_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::Schema {
            path: PRECISION_ENV.into(),
            reason: format!("{v:?} is not a positive integer"),
        }),
        Err(_) => Ok(DEFAULT_M),
    }
}

fn at(path: String) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Schema { path: p, reason } if p.is_empty() => Error::Schema { path: path.clone(), reason },
        Error::Schema { .. } | Error::Shorthand { .. } => e,
        other => Error::Schema { path: path.clone(), reason: other.to_string() },
    }
}

fn entry(model: &Arc<ModelRingParams>, e: &EntryDoc, path: &str) -> Result<RingElem> {
    match e {
        EntryDoc::Int(i) => Ok(RingElem::from_int(model, *i)),
        EntryDoc::Shorthand(s) => parse_shorthand(model, s),
        EntryDoc::Slots { slots } => {
            let slots = slots
                .iter()
                .map(|s| s.iter().map(Coeff::value).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()
                .map_err(at(path.into()))?;
            RingElem::from_slots(model, &slots).map_err(at(path.into()))
        }
        EntryDoc::Mono { .. } => Err(Error::Schema {
            path: path.into(),
            reason: "parameter monomials are only allowed in families".into(),
        }),
    }
}

fn matrix(model: &Arc<ModelRingParams>, m: &MatrixDoc, path: &str) -> Result<ModelMatrix> {
    let rows = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, x)| entry(model, x, &format!("{path}[{i}][{j}]")))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ModelMatrix::from_rows(model, rows).map_err(at(path.into()))
}

fn records(rs: &[RecordDoc], path: &str) -> Result<Vec<SubobjectRecord>> {
    rs.iter()
        .enumerate()
        .map(|(i, r)| {
            let degree = r.degree.to_rational().map_err(at(format!("{path}[{i}].degree")))?;
            Ok(SubobjectRecord::new(r.height, degree))
        })
        .collect()
}

impl InputDocument {
    pub fn model_params(&self) -> Result<Arc<ModelRingParams>> {
        let n = self.model.ram_index.ok_or_else(|| Error::Schema {
            path: "model.ram_index".into(),
            reason: "a datum needs the ramification index N".into(),
        })?;
        ModelRingParams::new(
            self.model.p,
            self.model.residue_degree,
            n,
            precision_of(&self.model)?,
            self.model.residue_poly.clone(),
        )
    }

    /// The structured datum; fails on family documents.
    pub fn to_datum(&self) -> Result<StructuredDatum> {
        let doc = self.datum.as_ref().ok_or_else(|| Error::Schema {
            path: "datum".into(),
            reason: "this command needs a datum document".into(),
        })?;
        let model = self.model_params()?;
        let mut d = StructuredDatum::empty(&model, doc.e, doc.f, doc.n);
        if let Some(blocks) = &doc.pi_on_omega {
            d.pi_on_omega = Some(
                blocks
                    .iter()
                    .enumerate()
                    .map(|(v, m)| matrix(&model, m, &format!("datum.pi_on_omega[{v}]")))
                    .collect::<Result<_>>()?,
            );
        }
        if let Some(tp) = &doc.tau_pi {
            d.tau_pi = Some(
                tp.iter()
                    .enumerate()
                    .map(|(v, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(i, x)| entry(&model, x, &format!("datum.tau_pi[{v}][{i}]")))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?,
            );
        }
        d.r_tau = doc.r_tau.clone();
        if let Some(dd) = &doc.dieudonne {
            d.dieudonne = Some(DieudonneData {
                phi: matrix(&model, &dd.phi, "datum.dieudonne.phi")?,
                pi_on_d: matrix(&model, &dd.pi_on_d, "datum.dieudonne.pi_on_D")?,
            });
        }
        if let Some(r) = &doc.subobjects_p {
            d.subobjects_p = Some(records(r, "datum.subobjects_p")?);
        }
        if let Some(r) = &doc.subobjects_pi {
            d.subobjects_pi = Some(records(r, "datum.subobjects_pi")?);
        }
        if let Some(t) = &doc.hn_tower {
            let mut tower = BTreeMap::new();
            for (k, rs) in t {
                let path = format!("datum.hn_tower.{k}");
                let level: usize = k.parse().map_err(|_| Error::Schema {
                    path: path.clone(),
                    reason: "tower levels are positive integers".into(),
                })?;
                tower.insert(level, records(rs, &path)?);
            }
            d.hn_tower = Some(tower);
        }
        Ok(d)
    }

    /// The family; fails on datum documents.
    pub fn to_family(&self) -> Result<FamilyDatum> {
        let doc = self.family.as_ref().ok_or_else(|| Error::Schema {
            path: "family".into(),
            reason: "this command needs a family document".into(),
        })?;
        let template = |m: &MatrixDoc, v: usize| -> Result<Vec<Vec<EntryTemplate>>> {
            m.iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, x)| {
                            let path = format!("family.pi_on_omega[{v}][{i}][{j}]");
                            match x {
                                EntryDoc::Int(c) => Ok(EntryTemplate::Fixed(c.to_string())),
                                EntryDoc::Shorthand(s) => Ok(EntryTemplate::Fixed(s.clone())),
                                EntryDoc::Mono { mono } => Ok(EntryTemplate::Mono(Monomial {
                                    c: mono.c.clone().unwrap_or_else(|| "1".into()),
                                    u: match &mono.u {
                                        Some(u) => u.to_rational().map_err(at(format!("{path}.mono.u")))?,
                                        None => Rational::from_integer(0.into()),
                                    },
                                    powers: mono.powers.clone(),
                                })),
                                EntryDoc::Slots { .. } => Err(Error::Schema {
                                    path,
                                    reason: "coefficient slots depend on N; use a shorthand or a monomial".into(),
                                }),
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let pi_on_omega = doc
            .pi_on_omega
            .iter()
            .enumerate()
            .map(|(v, m)| template(m, v))
            .collect::<Result<Vec<_>>>()?;
        let mut constraints = BTreeMap::new();
        for (k, a) in &doc.constraints {
            let path = format!("family.constraints.{k}");
            constraints.insert(
                k.clone(),
                Affine::new(
                    a.constant.to_rational().map_err(at(format!("{path}.constant")))?,
                    a.slope.to_rational().map_err(at(format!("{path}.slope")))?,
                ),
            );
        }
        let dom = &doc.domain;
        let domain = Interval {
            lo: dom.lo.to_rational().map_err(at("family.domain.lo".into()))?,
            hi: dom.hi.to_rational().map_err(at("family.domain.hi".into()))?,
            lo_closed: dom.lo_closed,
            hi_closed: dom.hi_closed,
        };
        let fam = FamilyDatum {
            p: self.model.p,
            residue_degree: self.model.residue_degree,
            residue_poly: self.model.residue_poly.clone(),
            precision: precision_of(&self.model)?,
            e: doc.e,
            f: doc.f,
            n: doc.n,
            pi_on_omega,
            r_tau: doc.r_tau.clone(),
            params: constraints.keys().cloned().collect(),
            constraints,
            domain,
        };
        fam.validate()?;
        Ok(fam)
    }
}

fn slots_of(x: &RingElem) -> EntryDoc {
    let n = x.params().ram_index() as usize;
    let mut slots: Vec<Vec<i128>> = (0..n).map(|i| x.slot(i).iter().map(|&c| c as i128).collect()).collect();
    while slots.last().is_some_and(|s| s.iter().all(|&c| c == 0)) {
        slots.pop();
    }
    for s in &mut slots {
        while s.len() > 1 && s.last() == Some(&0) {
            s.pop();
        }
    }
    if slots.is_empty() {
        return EntryDoc::Int(0);
    }
    EntryDoc::Slots { slots: slots.into_iter().map(|s| s.into_iter().map(Coeff::from_value).collect()).collect() }
}

fn matrix_doc(m: &ModelMatrix) -> MatrixDoc {
    (0..m.rows()).map(|i| m.row(i).iter().map(slots_of).collect()).collect()
}

fn records_doc(rs: &[SubobjectRecord]) -> Vec<RecordDoc> {
    rs.iter()
        .map(|r| RecordDoc { height: r.height, degree: RationalRepr::from_rational(&r.degree) })
        .collect()
}

/// Serialises a datum with every entry as explicit coefficient slots.
pub fn datum_document(d: &StructuredDatum) -> InputDocument {
    let model = &d.model;
    InputDocument {
        version: SCHEMA_VERSION.into(),
        model: ModelDoc {
            p: model.p(),
            residue_degree: model.residue_degree(),
            ram_index: Some(model.ram_index()),
            precision: Some(model.precision()),
            residue_poly: Some(model.residue_poly().to_vec()),
        },
        datum: Some(DatumDoc {
            e: d.e,
            f: d.f,
            n: d.n,
            pi_on_omega: d.pi_on_omega.as_ref().map(|bs| bs.iter().map(matrix_doc).collect()),
            tau_pi: d
                .tau_pi
                .as_ref()
                .map(|tp| tp.iter().map(|row| row.iter().map(slots_of).collect()).collect()),
            r_tau: d.r_tau.clone(),
            dieudonne: d.dieudonne.as_ref().map(|dd| DieudonneDoc {
                phi: matrix_doc(&dd.phi),
                pi_on_d: matrix_doc(&dd.pi_on_d),
            }),
            subobjects_p: d.subobjects_p.as_deref().map(records_doc),
            subobjects_pi: d.subobjects_pi.as_deref().map(records_doc),
            hn_tower: d
                .hn_tower
                .as_ref()
                .map(|t| t.iter().map(|(k, rs)| (k.to_string(), records_doc(rs))).collect()),
        }),
        family: None,
    }
}
