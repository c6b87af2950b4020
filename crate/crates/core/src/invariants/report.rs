use super::{
    dual_integral_hodge, dual_matrix_involution, hn_p, hn_pi, hn_tower_limit, hodge_special_fibre,
    hodge_special_fibre_per_upsilon, integral_hodge, is_pi_diagonalisable, is_tame, newton_special_fibre,
    pappas_rapoport, pappas_rapoport_per_upsilon, pi_diagonalisable_criterion, pi_diagonalisable_direct,
    Diagonalisability, HodgeSource, IntegralHodge, StructuredDatum, TowerLimit,
};
use crate::error::{Error, Result};
use crate::lattice::default_tolerance;
use crate::polygon::{poly_dual, poly_leq_witness};
use crate::{BreakFn, Polygon, Rational};

/// A value that was computed, skipped for missing input, or failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Computed<T> {
    Value(T),
    Skipped(String),
    Failed(Error),
}

impl<T> Computed<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Computed::Value(v),
            Err(Error::Missing(what)) => Computed::Skipped(format!("{what} absent")),
            Err(e) => Computed::Failed(e),
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Computed::Value(v) => Some(v),
            _ => None,
        }
    }

    /// Why no value is available, for dependent checks.
    fn reason(&self, name: &str) -> String {
        match self {
            Computed::Value(_) => String::new(),
            Computed::Skipped(why) => format!("{name}: {why}"),
            Computed::Failed(e) => format!("{name} failed: {e}"),
        }
    }
}

/// Every polygon the datum supports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolygonSet {
    pub integral_hodge: Computed<IntegralHodge>,
    /// Special-fibre Hodge polygon (from the cotangent data when present).
    pub hodge: Computed<Polygon>,
    pub hodge_per_upsilon: Computed<Vec<Polygon>>,
    pub pappas_rapoport: Computed<Polygon>,
    pub pappas_rapoport_per_upsilon: Computed<Vec<Polygon>>,
    pub newton: Computed<Polygon>,
    pub dual_integral_hodge: Computed<Polygon>,
    pub hn_p: Computed<BreakFn>,
    pub hn_pi: Computed<BreakFn>,
    pub hn_tower: Computed<TowerLimit>,
    pub pi_diagonalisable: Computed<Diagonalisability>,
}

impl PolygonSet {
    /// First computation error, if any.
    pub fn first_error(&self) -> Option<&Error> {
        fn err<T>(c: &Computed<T>) -> Option<&Error> {
            match c {
                Computed::Failed(e) => Some(e),
                _ => None,
            }
        }
        err(&self.integral_hodge)
            .or_else(|| err(&self.hodge))
            .or_else(|| err(&self.hodge_per_upsilon))
            .or_else(|| err(&self.pappas_rapoport))
            .or_else(|| err(&self.pappas_rapoport_per_upsilon))
            .or_else(|| err(&self.newton))
            .or_else(|| err(&self.dual_integral_hodge))
            .or_else(|| err(&self.hn_p))
            .or_else(|| err(&self.hn_pi))
            .or_else(|| err(&self.hn_tower))
            .or_else(|| err(&self.pi_diagonalisable))
    }
}

fn hodge_source(datum: &StructuredDatum) -> HodgeSource {
    if datum.pi_on_omega.is_some() {
        HodgeSource::Omega
    } else {
        HodgeSource::Dieudonne
    }
}

/// Computes every available polygon without validating first.
pub fn compute_polygons(datum: &StructuredDatum) -> PolygonSet {
    let src = hodge_source(datum);
    PolygonSet {
        integral_hodge: Computed::from_result(integral_hodge(datum)),
        hodge: Computed::from_result(hodge_special_fibre(datum, src)),
        hodge_per_upsilon: Computed::from_result(hodge_special_fibre_per_upsilon(datum, src)),
        pappas_rapoport: Computed::from_result(pappas_rapoport(datum)),
        pappas_rapoport_per_upsilon: Computed::from_result(pappas_rapoport_per_upsilon(datum)),
        newton: Computed::from_result(newton_special_fibre(datum)),
        dual_integral_hodge: Computed::from_result(dual_integral_hodge(datum)),
        hn_p: Computed::from_result(hn_p(datum)),
        hn_pi: Computed::from_result(hn_pi(datum)),
        hn_tower: Computed::from_result(hn_tower_limit(datum, &default_tolerance())),
        pi_diagonalisable: Computed::from_result(is_pi_diagonalisable(datum)),
    }
}

/// Verdict of one comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Holds,
    /// `witness` locates the first violation.
    Fails { witness: String },
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: CheckStatus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonReport {
    /// `None` when validation failed.
    pub polygons: Option<PolygonSet>,
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
    pub validation_error: Option<Error>,
}

impl ComparisonReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks
            .iter()
            .filter(|c| matches!(c.status, CheckStatus::Fails { .. }))
    }

    pub fn all_hold(&self) -> bool {
        self.validation_error.is_none() && self.failures().next().is_none()
    }

    pub fn status(&self, name: &str) -> Option<&CheckStatus> {
        self.checks.iter().find(|c| c.name == name).map(|c| &c.status)
    }
}

pub const CHECK_HDGI_PR: &str = "Hdg^int <= PR";
pub const CHECK_HDGI_PR_UPS: &str = "Hdg^int_v <= PR_v for every v";
pub const CHECK_HDG_PR: &str = "Hdg <= PR";
pub const CHECK_HDG_PR_UPS: &str = "Hdg_v <= PR_v for every v";
pub const CHECK_MAX: &str = "Hdg^int = PR iff Hdg = PR";
pub const CHECK_HN_P: &str = "HN(H[p]) <= Hdg^int";
pub const CHECK_HN_PI: &str = "HN(H[pi]) <= Hdg^int";
pub const CHECK_HN_P_PI: &str = "HN(H[p]) <= HN(H[pi])";
pub const CHECK_DUAL_PATHS: &str = "dual polygon: slope and matrix routes agree";
pub const CHECK_DUAL_INVOLUTION: &str = "duality is an involution";
pub const CHECK_ENDPOINTS: &str = "every endpoint equals dim H / d";
pub const CHECK_PID_HODGE: &str = "pi-diagonalisable implies Hdg^int = Hdg";
pub const CHECK_PID_ROUTES: &str = "tame slope criterion agrees with the direct test";

fn poly_check(f: &Polygon, g: &Polygon) -> CheckStatus {
    match poly_leq_witness(f, g) {
        Ok(None) => CheckStatus::Holds,
        Ok(Some(i)) => CheckStatus::Fails {
            witness: format!("prefix {i}: {f} vs {g}"),
        },
        Err(e) => CheckStatus::Skipped { reason: e.to_string() },
    }
}

fn poly_check_each(fs: &[Polygon], gs: &[Polygon]) -> CheckStatus {
    for (v, (f, g)) in fs.iter().zip(gs).enumerate() {
        if let CheckStatus::Fails { witness } = poly_check(f, g) {
            return CheckStatus::Fails {
                witness: format!("v = {v}, {witness}"),
            };
        }
    }
    CheckStatus::Holds
}

fn fn_check(f: &BreakFn, g: &BreakFn) -> CheckStatus {
    match f.leq_witness(g) {
        Ok(None) => CheckStatus::Holds,
        Ok(Some(x)) => CheckStatus::Fails {
            witness: format!("x = {x}: {} > {}", f.value_at(&x), g.value_at(&x)),
        },
        Err(e) => CheckStatus::Skipped { reason: e.to_string() },
    }
}

fn skipped(reason: String) -> CheckStatus {
    CheckStatus::Skipped { reason }
}

/// Runs every comparison the datum supports.
pub fn check_all(datum: &StructuredDatum) -> ComparisonReport {
    let warnings = match datum.validate() {
        Ok(w) => w,
        Err(e) => {
            return ComparisonReport {
                polygons: None,
                checks: Vec::new(),
                warnings: Vec::new(),
                validation_error: Some(e),
            }
        }
    };
    let ps = compute_polygons(datum);
    let checks = run_checks(datum, &ps);
    ComparisonReport {
        polygons: Some(ps),
        checks,
        warnings,
        validation_error: None,
    }
}

fn run_checks(datum: &StructuredDatum, ps: &PolygonSet) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut push = |name, status| out.push(CheckResult { name, status });
    let hi = ps.integral_hodge.value();
    let hi_reason = || ps.integral_hodge.reason("integral Hodge");
    let pr_reason = || ps.pappas_rapoport.reason("PR");
    let hdg_reason = || ps.hodge.reason("Hodge");

    push(
        CHECK_HDGI_PR,
        match (hi, ps.pappas_rapoport.value()) {
            (Some(h), Some(pr)) => poly_check(&h.averaged, pr),
            (None, _) => skipped(hi_reason()),
            _ => skipped(pr_reason()),
        },
    );
    push(
        CHECK_HDGI_PR_UPS,
        match (hi, ps.pappas_rapoport_per_upsilon.value()) {
            (Some(h), Some(pr)) => poly_check_each(&h.per_upsilon, pr),
            (None, _) => skipped(hi_reason()),
            _ => skipped(ps.pappas_rapoport_per_upsilon.reason("PR")),
        },
    );
    push(
        CHECK_HDG_PR,
        match (ps.hodge.value(), ps.pappas_rapoport.value()) {
            (Some(h), Some(pr)) => poly_check(h, pr),
            (None, _) => skipped(hdg_reason()),
            _ => skipped(pr_reason()),
        },
    );
    push(
        CHECK_HDG_PR_UPS,
        match (ps.hodge_per_upsilon.value(), ps.pappas_rapoport_per_upsilon.value()) {
            (Some(h), Some(pr)) => poly_check_each(h, pr),
            (None, _) => skipped(ps.hodge_per_upsilon.reason("Hodge")),
            _ => skipped(ps.pappas_rapoport_per_upsilon.reason("PR")),
        },
    );
    push(
        CHECK_MAX,
        match (hi, ps.hodge.value(), ps.pappas_rapoport.value()) {
            (Some(h), Some(hdg), Some(pr)) => {
                let a = h.averaged == *pr;
                let b = hdg == pr;
                if a == b {
                    CheckStatus::Holds
                } else {
                    CheckStatus::Fails {
                        witness: format!("Hdg^int = PR is {a} but Hdg = PR is {b}"),
                    }
                }
            }
            (None, _, _) => skipped(hi_reason()),
            (_, None, _) => skipped(hdg_reason()),
            _ => skipped(pr_reason()),
        },
    );
    let hi_fn = hi.map(|h| h.averaged.to_function());
    push(
        CHECK_HN_P,
        match (ps.hn_p.value(), &hi_fn) {
            (Some(hn), Some(h)) => fn_check(hn, h),
            (None, _) => skipped(ps.hn_p.reason("HN(H[p])")),
            _ => skipped(hi_reason()),
        },
    );
    push(
        CHECK_HN_PI,
        match (ps.hn_pi.value(), &hi_fn) {
            (Some(hn), Some(h)) => fn_check(hn, h),
            (None, _) => skipped(ps.hn_pi.reason("HN(H[pi])")),
            _ => skipped(hi_reason()),
        },
    );
    push(
        CHECK_HN_P_PI,
        match (ps.hn_p.value(), ps.hn_pi.value()) {
            (Some(a), Some(b)) => fn_check(a, b),
            (None, _) => skipped(ps.hn_p.reason("HN(H[p])")),
            _ => skipped(ps.hn_pi.reason("HN(H[pi])")),
        },
    );
    push(
        CHECK_DUAL_PATHS,
        match &ps.dual_integral_hodge {
            Computed::Value(_) => CheckStatus::Holds,
            Computed::Failed(Error::InternalMismatch(m)) => CheckStatus::Fails { witness: m.clone() },
            other => skipped(other.reason("dual polygon")),
        },
    );
    push(
        CHECK_DUAL_INVOLUTION,
        match hi {
            Some(h) => {
                let twice = poly_dual(&h.averaged).and_then(|d| poly_dual(&d));
                match (twice, dual_matrix_involution(datum)) {
                    (Ok(t), Ok(true)) if t == h.averaged => CheckStatus::Holds,
                    (Ok(t), Ok(_)) if t != h.averaged => CheckStatus::Fails {
                        witness: format!("dual of dual is {t}, expected {}", h.averaged),
                    },
                    (Ok(_), Ok(false)) => CheckStatus::Fails {
                        witness: "p (p A^-1)^-1 changes the elementary divisors".into(),
                    },
                    (Err(e), _) | (_, Err(e)) => skipped(e.to_string()),
                    _ => unreachable!(),
                }
            }
            None => skipped(hi_reason()),
        },
    );
    push(CHECK_ENDPOINTS, endpoint_check(datum, ps));
    push(
        CHECK_PID_HODGE,
        match (ps.pi_diagonalisable.value(), hi, ps.hodge.value()) {
            (Some(Diagonalisability::Diagonalisable), Some(h), Some(hdg)) => {
                if h.averaged == *hdg {
                    CheckStatus::Holds
                } else {
                    CheckStatus::Fails {
                        witness: format!("Hdg^int = {} but Hdg = {hdg}", h.averaged),
                    }
                }
            }
            (Some(Diagonalisability::NotDiagonalisable), _, _) => CheckStatus::Holds,
            (Some(Diagonalisability::Undecided(why)), _, _) => skipped(format!("undecided: {why}")),
            (None, _, _) => skipped(ps.pi_diagonalisable.reason("diagonalisability")),
            (_, None, _) => skipped(hi_reason()),
            _ => skipped(hdg_reason()),
        },
    );
    push(CHECK_PID_ROUTES, pid_routes(datum));
    out
}

fn pid_routes(datum: &StructuredDatum) -> CheckStatus {
    if datum.tau_pi.is_none() {
        return skipped("tau_pi absent".into());
    }
    if !is_tame(datum) {
        return skipped("F is wildly ramified".into());
    }
    let direct = match pi_diagonalisable_direct(datum) {
        Ok(d) => d,
        Err(e) => return skipped(e.to_string()),
    };
    let Some(direct) = direct.as_bool() else {
        return skipped("direct test undecided".into());
    };
    match pi_diagonalisable_criterion(datum) {
        Ok(c) if c == direct => CheckStatus::Holds,
        Ok(c) => CheckStatus::Fails {
            witness: format!("slope criterion says {c}, direct test says {direct}"),
        },
        Err(e) => skipped(e.to_string()),
    }
}

fn endpoint_check(datum: &StructuredDatum, ps: &PolygonSet) -> CheckStatus {
    let Some(expect) = datum.endpoint() else {
        return skipped("dim H undetermined".into());
    };
    let mut ends: Vec<(&str, Rational)> = Vec::new();
    if let Some(h) = ps.integral_hodge.value() {
        ends.push(("Hdg^int", h.averaged.total()));
    }
    let polys = [
        ("Hdg", &ps.hodge),
        ("PR", &ps.pappas_rapoport),
        ("Newt", &ps.newton),
        ("dual Hdg^int", &ps.dual_integral_hodge),
    ];
    for (name, c) in polys {
        if let Some(p) = c.value() {
            let total = if name == "dual Hdg^int" {
                Rational::from_integer((datum.n as i64).into()) - p.total()
            } else {
                p.total()
            };
            ends.push((name, total));
        }
    }
    for (name, c) in [("HN(H[p])", &ps.hn_p), ("HN(H[pi])", &ps.hn_pi)] {
        if let Some(f) = c.value() {
            ends.push((name, f.end_value()));
        }
    }
    if let Some(t) = ps.hn_tower.value() {
        ends.push(("HN tower limit", t.limit.end_value()));
    }
    if ends.is_empty() {
        return skipped("no polygon available".into());
    }
    match ends.iter().find(|(_, v)| *v != expect) {
        Some((name, v)) => CheckStatus::Fails {
            witness: format!("{name} ends at {v}, dim H / d = {expect}"),
        },
        None => CheckStatus::Holds,
    }
}
