//! Plain-text reports. Exact rationals come first; decimals are for reading only.

use std::fmt::Write;

use num_traits::{ToPrimitive, Zero};

use crate::family::{Continuity, SublevelRegion, SweepResult};
use crate::invariants::{
    CheckStatus, ComparisonReport, Computed, Diagonalisability, PolygonSet, StructuredDatum,
};
use crate::{BreakFn, Polygon, Rational};

/// `x` to 6 significant digits, trailing zeros dropped.
pub fn decimal(x: &Rational) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let v = x.to_f64().unwrap_or(f64::NAN);
    let mag = v.abs().log10().floor() as i32;
    let digits = (5 - mag).max(0) as usize;
    let mut s = format!("{v:.digits$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn tuple<'a>(xs: impl IntoIterator<Item = &'a Rational>, f: fn(&Rational) -> String) -> String {
    let parts: Vec<String> = xs.into_iter().map(f).collect();
    format!("({})", parts.join(", "))
}

fn exact(x: &Rational) -> String {
    x.to_string()
}

/// `(5/6, 1/6) ~ (0.833333, 0.166667)`.
pub fn polygon(p: &Polygon) -> String {
    format!("{} ~ {}", tuple(p.slopes(), exact), tuple(p.slopes(), decimal))
}

/// Vertex list of a break function.
pub fn break_fn(f: &BreakFn) -> String {
    let pts: Vec<String> = f.vertices().iter().map(|(x, y)| format!("({x}, {y})")).collect();
    let approx: Vec<String> = f
        .vertices()
        .iter()
        .map(|(x, y)| format!("({}, {})", decimal(x), decimal(y)))
        .collect();
    format!("vertices {} ~ {}", pts.join(" "), approx.join(" "))
}

fn line<T>(out: &mut String, label: &str, c: &Computed<T>, show: impl Fn(&T) -> String) {
    let body = match c {
        Computed::Value(v) => show(v),
        Computed::Skipped(why) => format!("skipped: {why}"),
        Computed::Failed(e) => format!("failed: {e}"),
    };
    let _ = writeln!(out, "{label:<28}{body}");
}

fn per_upsilon(ps: &[Polygon]) -> String {
    let parts: Vec<String> = ps.iter().map(|p| tuple(p.slopes(), exact)).collect();
    parts.join(" ")
}

pub fn header(d: &StructuredDatum) -> String {
    let m = &d.model;
    format!(
        "datum: p = {}, f' = {}, N = {}, M = {}; e = {}, f = {}, n = {}\n",
        m.p(),
        m.residue_degree(),
        m.ram_index(),
        m.precision(),
        d.e,
        d.f,
        d.n
    )
}

pub fn polygons(ps: &PolygonSet) -> String {
    let mut out = String::new();
    line(&mut out, "integral Hodge", &ps.integral_hodge, |h| polygon(&h.averaged));
    line(&mut out, "  per v", &ps.integral_hodge, |h| per_upsilon(&h.per_upsilon));
    line(&mut out, "Hodge (special fibre)", &ps.hodge, polygon);
    line(&mut out, "  per v", &ps.hodge_per_upsilon, |v| per_upsilon(v));
    line(&mut out, "Pappas-Rapoport", &ps.pappas_rapoport, polygon);
    line(&mut out, "  per v", &ps.pappas_rapoport_per_upsilon, |v| per_upsilon(v));
    line(&mut out, "Newton", &ps.newton, polygon);
    line(&mut out, "dual integral Hodge", &ps.dual_integral_hodge, polygon);
    line(&mut out, "HN(H[p])", &ps.hn_p, break_fn);
    line(&mut out, "HN(H[pi])", &ps.hn_pi, break_fn);
    line(&mut out, "HN tower limit", &ps.hn_tower, |t| {
        let tag = if t.consistent { "" } else { " (level 1 differs from the limit)" };
        format!("{}{tag}", break_fn(&t.limit))
    });
    line(&mut out, "pi-diagonalisable", &ps.pi_diagonalisable, |d| match d {
        Diagonalisability::Diagonalisable => "yes".into(),
        Diagonalisability::NotDiagonalisable => "no".into(),
        Diagonalisability::Undecided(why) => format!("undecided: {why}"),
    });
    out
}

pub fn checks(report: &ComparisonReport) -> String {
    let mut out = String::new();
    if let Some(e) = &report.validation_error {
        let _ = writeln!(out, "validation failed: {e}");
        return out;
    }
    if let Some(ps) = &report.polygons {
        out.push_str(&polygons(ps));
        out.push('\n');
    }
    for c in &report.checks {
        let status = match &c.status {
            CheckStatus::Holds => "holds".to_string(),
            CheckStatus::Fails { witness } => format!("FAILS at {witness}"),
            CheckStatus::Skipped { reason } => format!("skipped: {reason}"),
        };
        let _ = writeln!(out, "{:<52}{status}", c.name);
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    let failed = report.failures().count();
    let _ = writeln!(
        out,
        "{} checks, {} failed",
        report.checks.len(),
        failed
    );
    out
}

pub fn sweep(sw: &SweepResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "samples: {}", sw.samples.len());
    for (s, p) in &sw.samples {
        let _ = writeln!(out, "  s = {:<12}{}", s.to_string(), polygon(p));
    }
    for (i, m) in sw.fitted.iter().enumerate() {
        let _ = writeln!(out, "slope {}: {m}", i + 1);
    }
    let verdict = match &sw.continuity {
        Continuity::Continuous => "continuous".to_string(),
        Continuity::Discontinuous { between } => format!("discontinuous between {} and {}", between.0, between.1),
        Continuity::Undecided => "undecided (refinement cap reached)".to_string(),
    };
    let _ = writeln!(out, "continuity: {verdict}");
    out
}

pub fn region(f0: &Polygon, r: &SublevelRegion) -> String {
    let mut out = String::new();
    let ivs: Vec<String> = r.intervals.iter().map(ToString::to_string).collect();
    let body = if ivs.is_empty() { "empty".to_string() } else { ivs.join(" u ") };
    let _ = writeln!(out, "sublevel region of {}: {body}", tuple(f0.slopes(), exact));
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational;

    #[test]
    fn six_significant_digits() {
        assert_eq!(decimal(&rational(5, 6)), "0.833333");
        assert_eq!(decimal(&rational(1, 6)), "0.166667");
        assert_eq!(decimal(&rational(1, 1)), "1");
        assert_eq!(decimal(&rational(2, 3)), "0.666667");
        assert_eq!(decimal(&rational(1000, 3)), "333.333");
        assert_eq!(decimal(&rational(-1, 8)), "-0.125");
        assert_eq!(decimal(&rational(0, 1)), "0");
    }
}
