use std::collections::BTreeMap;

use polyinv::family::*;
use polyinv::{rational, Error, Polygon, Rational};

fn q(a: i64, b: i64) -> Rational {
    rational(a, b)
}

fn poly(s: &[(i64, i64)]) -> Polygon {
    Polygon::new(s.iter().map(|&(a, b)| q(a, b)).collect()).unwrap()
}

fn fixed(c: &str) -> EntryTemplate {
    EntryTemplate::Fixed(c.into())
}

fn mono(u: Rational, powers: &[(&str, u32)]) -> EntryTemplate {
    EntryTemplate::Mono(Monomial {
        c: "1".into(),
        u,
        powers: powers.iter().map(|&(k, m)| (k.to_string(), m)).collect(),
    })
}

fn constraints(list: &[(&str, Affine)]) -> BTreeMap<String, Affine> {
    list.iter().map(|(k, a)| (k.to_string(), a.clone())).collect()
}

/// `[[0, 0, U sqrt(p)], [1, 0, 0], [0, T, 0]]` with `v(T) = s`, `v(U) = 1/2 - s`.
fn cubic_family() -> FamilyDatum {
    FamilyDatum {
        p: 5,
        residue_degree: 1,
        residue_poly: None,
        precision: 12,
        e: 3,
        f: 1,
        n: 2,
        pi_on_omega: vec![vec![
            vec![fixed("0"), fixed("0"), mono(q(1, 2), &[("U", 1)])],
            vec![fixed("1"), fixed("0"), fixed("0")],
            vec![fixed("0"), mono(q(0, 1), &[("T", 1)]), fixed("0")],
        ]],
        r_tau: Some(vec![1, 1, 1]),
        params: vec!["T".into(), "U".into()],
        constraints: constraints(&[
            ("T", Affine::new(q(0, 1), q(1, 1))),
            ("U", Affine::new(q(1, 2), q(-1, 1))),
        ]),
        domain: Interval::open(q(0, 1), q(1, 2)),
    }
}

/// `diag(T, U)` with `v(T) = s`, `v(U) = 1 - s` on `(lo, 1)`.
fn diagonal_family(lo: Rational) -> FamilyDatum {
    FamilyDatum {
        p: 3,
        residue_degree: 1,
        residue_poly: None,
        precision: 10,
        e: 2,
        f: 1,
        n: 2,
        pi_on_omega: vec![vec![
            vec![mono(q(0, 1), &[("T", 1)]), fixed("0")],
            vec![fixed("0"), mono(q(0, 1), &[("U", 1)])],
        ]],
        r_tau: Some(vec![1, 1]),
        params: vec!["T".into(), "U".into()],
        constraints: constraints(&[
            ("T", Affine::new(q(0, 1), q(1, 1))),
            ("U", Affine::new(q(1, 1), q(-1, 1))),
        ]),
        domain: Interval::open(lo, q(1, 1)),
    }
}

#[test]
fn instantiation_picks_the_least_ramification() {
    let fam = cubic_family();
    let d = instantiate(&fam, &q(1, 4)).unwrap();
    assert_eq!(d.model.ram_index(), 4);
    let d = instantiate(&fam, &q(1, 6)).unwrap();
    assert_eq!(d.model.ram_index(), 6);
    assert_eq!(integral_hodge_at(&fam, &q(1, 6)).unwrap(), poly(&[(5, 6), (1, 6)]));
    assert!(matches!(instantiate(&fam, &q(1, 2)), Err(Error::OutOfDomain(_))));
    assert!(matches!(instantiate(&fam, &q(0, 1)), Err(Error::OutOfDomain(_))));
}

#[test]
fn cubic_family_sweep() {
    let fam = cubic_family();
    let sw = sweep(&fam, 8).unwrap();
    assert!(sw.continuity_ok());
    assert_eq!(sw.fitted.len(), 2);
    for m in &sw.fitted {
        assert_eq!(m.pieces.len(), 1);
    }
    assert_eq!(sw.fitted[0].pieces[0].line, Affine::new(q(1, 1), q(-1, 1)));
    assert_eq!(sw.fitted[1].pieces[0].line, Affine::new(q(0, 1), q(1, 1)));
    assert_eq!(sweep(&fam, 16).unwrap().fitted, sw.fitted);

    let region = sublevel_region(&fam, &poly(&[(2, 3), (1, 3)]), 8).unwrap();
    assert!(region.warnings.is_empty());
    assert_eq!(
        region.intervals,
        vec![Interval { lo: q(1, 3), hi: q(1, 2), lo_closed: true, hi_closed: false }]
    );
}

#[test]
fn diagonal_family_breaks_at_one_half() {
    for lo in [q(0, 1), q(1, 5)] {
        let fam = diagonal_family(lo.clone());
        let sw = sweep(&fam, 8).unwrap();
        assert!(sw.continuity_ok());
        assert_eq!(sw.fitted[0].breaks(), vec![q(1, 2)]);
        assert_eq!(sw.fitted[1].breaks(), vec![q(1, 2)]);
        assert_eq!(sw.fitted[0].eval(&q(1, 4)), q(3, 4));
        assert_eq!(sw.fitted[0].eval(&q(3, 4)), q(3, 4));
        assert_eq!(sweep(&fam, 16).unwrap().fitted, sw.fitted);
        // the sublevel set of (3/5, 2/5) is [2/5, 3/5]
        let region = sublevel_region(&fam, &poly(&[(3, 5), (2, 5)]), 8).unwrap();
        assert_eq!(region.intervals, vec![Interval::closed(q(2, 5), q(3, 5))]);
    }
}

#[test]
fn endpoint_mismatch_gives_empty_region() {
    let region = sublevel_region(&cubic_family(), &poly(&[(1, 1), (1, 1)]), 4).unwrap();
    assert!(region.intervals.is_empty());
    assert_eq!(region.warnings.len(), 1);
}

#[test]
fn family_validation() {
    let mut fam = cubic_family();
    fam.constraints.remove("U");
    assert!(matches!(fam.validate(), Err(Error::Validation(_))));
    let mut fam = cubic_family();
    fam.domain = Interval::open(q(0, 1), q(1, 1));
    assert!(matches!(fam.validate(), Err(Error::Validation(_))));
    let mut fam = cubic_family();
    fam.pi_on_omega[0][1][0] = fixed("u");
    assert!(matches!(fam.validate(), Err(Error::Validation(_))));
}
