use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use polyinv::family::*;
use polyinv::invariants::random::{random_block, random_datum, random_datum_with, random_hn_records, scramble, Coupling};
use polyinv::invariants::*;
use polyinv::lattice::*;
use polyinv::polygon::{concave_hull, poly_combine, poly_dual, poly_leq};
use polyinv::ring::{ModelRingParams, RingElem};
use polyinv::{rational, Error, Polygon, Rational};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(a: i64, b: i64) -> Rational {
    rational(a, b)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

// ---------------------------------------------------------------- ring

fn model(idx: usize) -> Arc<ModelRingParams> {
    let (p, f, n, m) = [(2, 1, 2, 20), (3, 2, 3, 12), (5, 1, 4, 10), (7, 3, 2, 8), (2, 2, 3, 16)][idx];
    ModelRingParams::new(p, f, n, m, None).unwrap()
}

fn element(r: &Arc<ModelRingParams>, rng: &mut ChaCha8Rng) -> RingElem {
    if rng.gen_bool(0.1) {
        return RingElem::zero(r);
    }
    let shift = rng.gen_range(0..=2 * r.ram_index());
    RingElem::random(r, rng, shift)
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn valuation_is_additive(idx in 0..5usize, seed in any::<u64>()) {
        let r = model(idx);
        let mut g = rng(seed);
        let (a, b) = (element(&r, &mut g), element(&r, &mut g));
        if let (Some(va), Some(vb)) = (a.val_u(), b.val_u()) {
            if va + vb < r.max_prec() {
                prop_assert_eq!((&a * &b).val_u(), Some(va + vb));
                prop_assert_eq!((&a * &b).valuation(), Some(a.valuation().unwrap() + b.valuation().unwrap()));
            }
        }
    }

    #[test]
    fn u_to_the_ram_index_is_p(idx in 0..5usize) {
        let r = model(idx);
        prop_assert_eq!(RingElem::u_pow(&r, r.ram_index()), RingElem::from_int(&r, r.p() as i64));
        prop_assert_eq!(RingElem::u_pow(&r, 1).pow(r.ram_index() as u128), RingElem::from_int(&r, r.p() as i64));
    }

    #[test]
    fn frobenius_is_a_ring_map(idx in 0..5usize, seed in any::<u64>()) {
        let r = model(idx);
        let mut g = rng(seed);
        let (a, b) = (element(&r, &mut g), element(&r, &mut g));
        prop_assert_eq!((&a * &b).frobenius(), &a.frobenius() * &b.frobenius());
        prop_assert_eq!((&a + &b).frobenius(), &a.frobenius() + &b.frobenius());
        prop_assert_eq!(a.frobenius_pow(r.residue_degree()), a);
    }

    #[test]
    fn residue_is_a_ring_map(idx in 0..5usize, seed in any::<u64>()) {
        let r = model(idx);
        let k = r.residue_field();
        let mut g = rng(seed);
        let (a, b) = (element(&r, &mut g), element(&r, &mut g));
        let (ra, rb) = (a.residue(), b.residue());
        prop_assert_eq!((&a + &b).residue(), k.add(&ra, &rb));
        prop_assert_eq!((&a - &b).residue(), k.sub(&ra, &rb));
        prop_assert_eq!((&a * &b).residue(), k.mul(&ra, &rb));
        prop_assert_eq!(ra.is_zero(), a.val_u() != Some(0));
    }
}

// ------------------------------------------------------------- polygon

/// Nonincreasing slopes with denominator 12 in `[0, 1]`.
fn random_polygon(g: &mut ChaCha8Rng, n: usize) -> Polygon {
    Polygon::from_unsorted((0..n).map(|_| q(g.gen_range(0..=12), 12)).collect())
}

/// Moves two slopes towards each other; the result lies below the input.
fn flatten(g: &mut ChaCha8Rng, f: &Polygon) -> Polygon {
    let mut xs = f.slopes().to_vec();
    if xs.len() >= 2 {
        for _ in 0..g.gen_range(1..=3) {
            let i = g.gen_range(0..xs.len());
            let j = (i + g.gen_range(1..xs.len())) % xs.len();
            let t = q(g.gen_range(0..=3), 3);
            let s = Rational::one() - &t;
            let (a, b) = (xs[i].clone(), xs[j].clone());
            xs[i] = &t * &a + &s * &b;
            xs[j] = &s * &a + &t * &b;
        }
    }
    Polygon::from_unsorted(xs)
}

/// A family of same-length polygons, most sharing a total, with known order relations.
fn polygon_pool(g: &mut ChaCha8Rng) -> Vec<Polygon> {
    let n = g.gen_range(1..=4);
    let top = random_polygon(g, n);
    let mid = flatten(g, &top);
    let low = flatten(g, &mid);
    let side = flatten(g, &top);
    vec![top, mid, low, side, random_polygon(g, n)]
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn leq_is_a_partial_order(seed in any::<u64>()) {
        let pool = polygon_pool(&mut rng(seed));
        let leq = |a: &Polygon, b: &Polygon| poly_leq(a, b).unwrap();
        prop_assert!(leq(&pool[1], &pool[0]) && leq(&pool[2], &pool[1]));
        for f in &pool {
            prop_assert!(leq(f, f));
            for g in &pool {
                if leq(f, g) && leq(g, f) {
                    prop_assert_eq!(f, g);
                }
                for h in &pool {
                    if leq(f, g) && leq(g, h) {
                        prop_assert!(leq(f, h), "{f} <= {g} <= {h}");
                    }
                }
            }
        }
    }

    #[test]
    fn combinations_stay_nonincreasing(seed in any::<u64>(), k in 1..5usize) {
        let mut g = rng(seed);
        let n = g.gen_range(1..=5);
        let polys: Vec<Polygon> = (0..k).map(|_| random_polygon(&mut g, n)).collect();
        let coeffs: Vec<Rational> = (0..k).map(|_| q(g.gen_range(0..=6), g.gen_range(1..=4))).collect();
        let c = poly_combine(&coeffs, &polys).unwrap();
        prop_assert!(c.slopes().windows(2).all(|w| w[0] >= w[1]));
        for i in 0..n {
            let slot: Rational = coeffs.iter().zip(&polys).map(|(a, p)| a * &p.slopes()[i]).sum();
            prop_assert_eq!(&c.slopes()[i], &slot);
        }
    }

    #[test]
    fn duality_preserves_the_order(seed in any::<u64>()) {
        let pool = polygon_pool(&mut rng(seed));
        for f in &pool {
            for g in &pool {
                if f.total() != g.total() {
                    continue;
                }
                // the dual's prefix sum at k is k - total + F(n - k)
                let (df, dg) = (poly_dual(f).unwrap(), poly_dual(g).unwrap());
                prop_assert_eq!(poly_leq(f, g).unwrap(), poly_leq(&df, &dg).unwrap());
                prop_assert_eq!(&poly_dual(&df).unwrap(), f);
            }
        }
    }

    #[test]
    fn hull_dominates_and_is_concave(seed in any::<u64>(), count in 0..10usize) {
        let mut g = rng(seed);
        let width = q(g.gen_range(1..=6), g.gen_range(1..=3));
        let mut pts = vec![(Rational::zero(), Rational::zero()), (width.clone(), q(g.gen_range(0..=8), 2))];
        for _ in 0..count {
            let x = &width * q(g.gen_range(0..=12), 12);
            pts.push((x, q(g.gen_range(-4..=8), 2)));
        }
        let hull = concave_hull(&pts, &width).unwrap();
        prop_assert!(hull.is_concave());
        let slopes = hull.segments();
        prop_assert!(slopes.windows(2).all(|w| w[0].0 >= w[1].0));
        for (x, y) in &pts {
            prop_assert!(&hull.value_at(x) >= y, "hull below ({x}, {y})");
        }
        for v in hull.vertices() {
            prop_assert!(pts.contains(v));
        }
    }
}

// ------------------------------------------------------------- lattice

/// Largest `M` with `p^M < 2^126`, halved so products stay representable.
fn wide_model(g: &mut ChaCha8Rng) -> Arc<ModelRingParams> {
    let (p, m) = [(2u64, 62), (3, 39), (5, 27)][g.gen_range(0..3)];
    ModelRingParams::new(p, g.gen_range(1..=2), g.gen_range(1..=3), m, None).unwrap()
}

fn sparse_matrix(g: &mut ChaCha8Rng, r: &Arc<ModelRingParams>, rows: usize, cols: usize) -> ModelMatrix {
    let mut m = ModelMatrix::zeros(r, rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            if g.gen_bool(0.7) {
                let shift = g.gen_range(0..=2 * r.ram_index());
                m.set(i, j, RingElem::random(r, g, shift));
            }
        }
    }
    m
}

fn nonsingular(g: &mut ChaCha8Rng, r: &Arc<ModelRingParams>, size: usize) -> ModelMatrix {
    loop {
        let m = sparse_matrix(g, r, size, size);
        if smith_valuations(&m).unwrap().rank_deficit == 0 {
            return m;
        }
    }
}

fn positive(v: &[Rational]) -> usize {
    v.iter().filter(|x| x.is_positive()).count()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn pivoting_matches_the_minor_oracle(seed in any::<u64>(), rows in 1..=4usize, cols in 1..=4usize) {
        let mut g = rng(seed);
        let r = wide_model(&mut g);
        let a = sparse_matrix(&mut g, &r, rows, cols);
        match (smith_valuations(&a), minor_fitting_oracle(&a)) {
            (Ok(ed), Ok(oracle)) => {
                prop_assert!(ed.vals.windows(2).all(|w| w[0] >= w[1]));
                prop_assert!(ed.vals.len() <= rows.min(cols));
                prop_assert_eq!(fitting_valuations(&a).unwrap(), oracle);
            }
            (Err(Error::PrecisionExhausted(_)), _) | (Ok(_), Err(Error::PrecisionExhausted(_))) => {}
            (x, y) => prop_assert!(false, "{x:?} vs {y:?}"),
        }
    }

    #[test]
    fn divisors_shrink_under_sub_and_quotient(seed in any::<u64>(), size in 1..=4usize) {
        let mut g = rng(seed);
        let r = wide_model(&mut g);
        let b = nonsingular(&mut g, &r, size);
        let c = nonsingular(&mut g, &r, size);
        let a = b.try_mul(&c).unwrap();
        let ea = smith_valuations(&a).unwrap();
        prop_assume!(ea.rank_deficit == 0);
        let (da, db, dc) = (ea.vals, smith_valuations(&b).unwrap().vals, smith_valuations(&c).unwrap().vals);
        // coker C embeds in coker A, and coker B is a quotient of it
        for (x, y) in dc.iter().zip(&da) {
            prop_assert!(x <= y, "injection {dc:?} vs {da:?}");
        }
        for (x, y) in db.iter().zip(&da) {
            prop_assert!(x <= y, "surjection {db:?} vs {da:?}");
        }
        prop_assert!(positive(&dc) <= positive(&da));
        prop_assert!(positive(&db) <= positive(&da));
    }

    #[test]
    fn kernel_chain_is_nonincreasing(seed in any::<u64>()) {
        let d = random_datum(&mut rng(seed)).unwrap();
        for a in d.pi_on_omega.as_ref().unwrap() {
            let chain = kernel_rank_chain(&a.residue(), d.e).unwrap();
            prop_assert!(chain.windows(2).all(|w| w[0] >= w[1]), "{chain:?}");
            prop_assert!(chain.iter().sum::<usize>() == a.rows());
        }
    }

    #[test]
    fn scaled_saturations_lie_in_the_image(seed in any::<u64>()) {
        let d = random_datum(&mut rng(seed)).unwrap();
        let taus = &d.tau_pi.as_ref().unwrap()[0];
        for a in d.pi_on_omega.as_ref().unwrap() {
            if a.rows() == 0 {
                continue;
            }
            let lats = saturated_eigenlattices(a, taus).unwrap();
            for mask in 1u32..1 << taus.len() {
                let chosen: Vec<usize> = (0..taus.len()).filter(|i| mask >> i & 1 == 1).collect();
                let mut span = ModelMatrix::zeros(a.params(), a.rows(), 0);
                let mut rho = RingElem::one(a.params());
                for &i in &chosen {
                    span = span.hcat(&lats[i]).unwrap();
                    rho = &rho * &taus[i];
                }
                if span.cols() == 0 {
                    continue;
                }
                let m_i = saturate(&span).unwrap();
                prop_assert_eq!(m_i.cols(), span.cols());
                match columns_in_image(a, &m_i.scale(&rho)) {
                    Ok(inside) => prop_assert!(inside, "rho_I M_I not in A M for I = {chosen:?}"),
                    Err(Error::PrecisionExhausted(_)) => {}
                    Err(e) => prop_assert!(false, "{e}"),
                }
            }
        }
    }
}

// ---------------------------------------------------------- invariants

/// `[[A11, A12], [0, A22]]`, both diagonal blocks semisimple in the conjugates.
fn triangular(
    g: &mut ChaCha8Rng,
    d: &StructuredDatum,
    r1: &[usize],
    r2: &[usize],
) -> (ModelMatrix, ModelMatrix) {
    let model = &d.model;
    let taus = &d.tau_pi.as_ref().unwrap()[0];
    let a11 = random_block(g, model, taus, r1, Coupling::Mixed);
    let a22 = random_block(g, model, taus, r2, Coupling::Mixed);
    let (s1, s2) = (a11.rows(), a22.rows());
    let mut a = ModelMatrix::zeros(model, s1 + s2, s1 + s2);
    for i in 0..s1 {
        for j in 0..s1 {
            a.set(i, j, a11.get(i, j).clone());
        }
        for j in 0..s2 {
            a.set(i, s1 + j, RingElem::random(model, g, 0));
        }
    }
    for i in 0..s2 {
        for j in 0..s2 {
            a.set(s1 + i, s1 + j, a22.get(i, j).clone());
        }
    }
    (scramble(g, &a, 3 * (s1 + s2)), a22)
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn random_data_pass_every_comparison(seed in any::<u64>()) {
        let mut g = rng(seed);
        let mut d = random_datum(&mut g).unwrap();
        let hi = integral_hodge(&d).unwrap().averaged;
        let (hp, hpi) = random_hn_records(&mut g, &d, &hi);
        d.subobjects_p = Some(hp);
        d.subobjects_pi = Some(hpi);
        let report = check_all(&d);
        prop_assert!(report.all_hold(), "{:?}", report.failures().collect::<Vec<_>>());
        for name in [CHECK_HDGI_PR, CHECK_MAX, CHECK_ENDPOINTS, CHECK_DUAL_PATHS, CHECK_DUAL_INVOLUTION, CHECK_HN_P_PI] {
            prop_assert_eq!(report.status(name), Some(&CheckStatus::Holds), "{}", name);
        }
        let pr = pappas_rapoport(&d).unwrap();
        prop_assert!(poly_leq(&hi, &pr).unwrap());
        let end = d.endpoint().unwrap();
        prop_assert_eq!(hi.total(), end.clone());
        prop_assert_eq!(hodge_special_fibre(&d, HodgeSource::Omega).unwrap().total(), end);
    }

    #[test]
    fn quotients_have_smaller_slopes(seed in any::<u64>(), e in 1..=3usize, n in 1..=3usize) {
        let mut g = rng(seed);
        let d = random_datum_with(&mut g, e, 1, n).unwrap();
        let r1: Vec<usize> = (0..e).map(|_| g.gen_range(0..=n)).collect();
        let r2: Vec<usize> = (0..e).map(|_| g.gen_range(0..=n)).collect();
        prop_assume!(r1.iter().sum::<usize>() > 0 && r2.iter().sum::<usize>() > 0);
        let (a, a22) = triangular(&mut g, &d, &r1, &r2);
        let width = a.rows();
        let whole = divisor_polygon(&a, width).unwrap();
        let quotient = divisor_polygon(&a22, width).unwrap();
        for (j, (b, c)) in quotient.slopes().iter().zip(whole.slopes()).enumerate() {
            prop_assert!(b <= c, "slot {j}: {quotient} vs {whole}");
        }
        // when the quotient's endpoint lies on the big polygon they agree up to there
        let nq = positive(quotient.slopes());
        if quotient.total() == whole.prefix_sums()[nq] {
            prop_assert_eq!(&quotient.slopes()[..nq], &whole.slopes()[..nq]);
        }
    }

    #[test]
    fn diagonal_coupling_is_diagonalisable(seed in any::<u64>(), e in 1..=3usize, n in 1..=3usize) {
        let mut g = rng(seed);
        let base = random_datum_with(&mut g, e, 1, n).unwrap();
        let taus = base.tau_pi.as_ref().unwrap()[0].clone();
        // a diagonal [pi] has kernel everything mod the maximal ideal, so size <= n
        let mut r = vec![0; e];
        for _ in 0..g.gen_range(0..=n) {
            r[g.gen_range(0..e)] += 1;
        }
        let a = random_block(&mut g, &base.model, &taus, &r, Coupling::Diagonal);
        let mut d = StructuredDatum::empty(&base.model, e, 1, n);
        d.pi_on_omega = Some(vec![a]);
        d.tau_pi = Some(vec![taus]);
        d.r_tau = Some(r);
        d.validate().unwrap();
        prop_assert_eq!(is_pi_diagonalisable(&d).unwrap(), Diagonalisability::Diagonalisable);
        prop_assert_eq!(integral_hodge(&d).unwrap().averaged, hodge_special_fibre(&d, HodgeSource::Omega).unwrap());
    }

    #[test]
    fn hn_of_p_torsion_lies_below_hn_of_pi_torsion(seed in any::<u64>()) {
        let mut g = rng(seed);
        let mut d = random_datum(&mut g).unwrap();
        let hi = integral_hodge(&d).unwrap().averaged;
        let (hp, hpi) = random_hn_records(&mut g, &d, &hi);
        d.subobjects_p = Some(hp);
        d.subobjects_pi = Some(hpi);
        let (a, b) = (hn_p(&d).unwrap(), hn_pi(&d).unwrap());
        prop_assert!(a.is_concave() && b.is_concave());
        prop_assert!(a.leq(&b).unwrap(), "{a:?} vs {b:?}");
        prop_assert!(b.leq(&hi.to_function()).unwrap());
    }
}

// -------------------------------------------------------------- family

fn fixed(c: &str) -> EntryTemplate {
    EntryTemplate::Fixed(c.into())
}

fn mono(u: Rational, var: &str) -> EntryTemplate {
    EntryTemplate::Mono(Monomial { c: "1".into(), u, powers: BTreeMap::from([(var.to_string(), 1)]) })
}

fn two_params(t: Affine, u: Affine) -> BTreeMap<String, Affine> {
    BTreeMap::from([("T".to_string(), t), ("U".to_string(), u)])
}

/// Cubic `[pi]` with `v(T) = s`, `v(U sqrt(p)) = 1 - s` on `(0, 1/2)`.
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
            vec![fixed("0"), fixed("0"), mono(q(1, 2), "U")],
            vec![fixed("1"), fixed("0"), fixed("0")],
            vec![fixed("0"), mono(q(0, 1), "T"), fixed("0")],
        ]],
        r_tau: Some(vec![1, 1, 1]),
        params: vec!["T".into(), "U".into()],
        constraints: two_params(Affine::new(q(0, 1), q(1, 1)), Affine::new(q(1, 2), q(-1, 1))),
        domain: Interval::open(q(0, 1), q(1, 2)),
    }
}

/// `diag(T, U)` with `v(T) = s`, `v(U) = 1 - s` on `(0, 1)`.
fn diagonal_family() -> FamilyDatum {
    FamilyDatum {
        p: 3,
        residue_degree: 1,
        residue_poly: None,
        precision: 10,
        e: 2,
        f: 1,
        n: 2,
        pi_on_omega: vec![vec![vec![mono(q(0, 1), "T"), fixed("0")], vec![fixed("0"), mono(q(0, 1), "U")]]],
        r_tau: Some(vec![1, 1]),
        params: vec!["T".into(), "U".into()],
        constraints: two_params(Affine::new(q(0, 1), q(1, 1)), Affine::new(q(1, 1), q(-1, 1))),
        domain: Interval::open(q(0, 1), q(1, 1)),
    }
}

/// A rational strictly inside `(0, hi)` with denominator at most 24.
fn interior(hi: Rational) -> impl Strategy<Value = Rational> {
    (2..=24i64, any::<u32>()).prop_filter_map("point outside the domain", move |(den, k)| {
        let s = q(1 + k as i64 % (den - 1), den) * &hi;
        (s.is_positive() && s < hi).then_some(s)
    })
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn family_samples_lie_below_pr(s in interior(q(1, 2)), t in interior(q(1, 1))) {
        for (fam, x) in [(cubic_family(), s), (diagonal_family(), t)] {
            let d = instantiate(&fam, &x).unwrap();
            let hi = integral_hodge_at(&fam, &x).unwrap();
            prop_assert!(poly_leq(&hi, &pappas_rapoport(&d).unwrap()).unwrap(), "s = {x}: {hi}");
        }
    }

    #[test]
    fn sublevel_regions_are_the_expected_intervals(t in interior(q(1, 2))) {
        let f0 = Polygon::new(vec![Rational::one() - &t, t.clone()]).unwrap();
        let cubic = sublevel_region(&cubic_family(), &f0, 4).unwrap();
        prop_assert!(cubic.warnings.is_empty());
        prop_assert_eq!(
            cubic.intervals,
            vec![Interval { lo: t.clone(), hi: q(1, 2), lo_closed: true, hi_closed: false }]
        );
        let diag = sublevel_region(&diagonal_family(), &f0, 4).unwrap();
        prop_assert!(diag.warnings.is_empty());
        prop_assert_eq!(diag.intervals, vec![Interval::closed(t.clone(), Rational::one() - &t)]);
    }

    #[test]
    fn doubling_the_grid_keeps_the_fit(grid in 2..=8usize) {
        for fam in [cubic_family(), diagonal_family()] {
            let a = sweep(&fam, grid).unwrap();
            let b = sweep(&fam, 2 * grid).unwrap();
            prop_assert!(a.continuity_ok() && b.continuity_ok());
            prop_assert_eq!(&a.fitted, &b.fitted);
            for (s, p) in &b.samples {
                let fitted: Vec<Rational> = a.fitted.iter().map(|m| m.eval(s)).collect();
                prop_assert_eq!(&fitted[..], p.slopes(), "s = {}", s);
            }
        }
    }
}
