//! Command line front end: `polyinv <command> <file> [flags]`.

pub mod render;
pub mod schema;
pub mod svg;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::family::{sublevel_region, sweep};
use crate::invariants::random::{proportional_tower, random_datum, random_hn_records};
use crate::invariants::{check_all, compute_polygons, integral_hodge, CheckStatus, Computed, StructuredDatum};
use crate::{rational, Polygon};

pub use schema::{parse_input, InputDocument};

/// Exit status when some non-skipped check fails.
pub const EXIT_CHECK_FAILED: i32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Print every polygon the datum supports.
    Compute,
    /// Run all comparisons (or random suites with --trials).
    Check,
    /// Sweep a family and optionally extract a sublevel region.
    Family,
    /// Write an SVG overlay of the computed polygons.
    Plot,
}

#[derive(Clone, Debug, Parser)]
#[command(name = "polyinv", version, about = "Exact polygon invariants from matrix data")]
pub struct Cli {
    pub command: Command,
    /// JSON input document.
    pub file: Option<PathBuf>,
    /// Sweep grid size for `family`.
    #[arg(long, default_value_t = 16)]
    pub grid: usize,
    /// Target polygon for `family`, e.g. "2/3,1/3".
    #[arg(long)]
    pub sublevel: Option<String>,
    /// Random trials for `check`.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the output here instead of stdout.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

/// Command output and exit status.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn error(e: &Error) -> Self {
        Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") }
    }
}

fn load(path: &Option<PathBuf>) -> Result<InputDocument> {
    let path = path.as_ref().ok_or_else(|| Error::Schema {
        path: String::new(),
        reason: "no input file given".into(),
    })?;
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_input(&bytes)
}

fn parse_polygon(s: &str) -> Result<Polygon> {
    let slopes = s
        .split(',')
        .map(|t| schema::parse_rational(t).map_err(|_| Error::Schema {
            path: "--sublevel".into(),
            reason: format!("{t:?} is not a rational"),
        }))
        .collect::<Result<Vec<_>>>()?;
    Polygon::new(slopes).map_err(|e| Error::Schema { path: "--sublevel".into(), reason: e.to_string() })
}

/// Runs one command without touching stdout.
pub fn run(cli: &Cli) -> Outcome {
    let result = match cli.command {
        Command::Compute => load(&cli.file).and_then(|d| compute(&d)),
        Command::Check => check(cli),
        Command::Family => load(&cli.file).and_then(|d| family(&d, cli)),
        Command::Plot => load(&cli.file).and_then(|d| plot(&d)),
    };
    let mut outcome = match result {
        Ok(o) => o,
        Err(e) => return Outcome::error(&e),
    };
    if let Some(path) = &cli.output {
        if let Err(e) = std::fs::write(path, &outcome.stdout) {
            return Outcome::error(&Error::Io(format!("{}: {e}", path.display())));
        }
        outcome.stdout.clear();
    }
    outcome
}

fn compute(doc: &InputDocument) -> Result<Outcome> {
    let d = doc.to_datum()?;
    let warnings = d.validate()?;
    let ps = compute_polygons(&d);
    let mut out = render::header(&d);
    out.push_str(&render::polygons(&ps));
    for w in warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    let code = ps.first_error().map_or(0, Error::exit_code);
    Ok(Outcome { code, stdout: out, stderr: String::new() })
}

fn check(cli: &Cli) -> Result<Outcome> {
    let mut out = String::new();
    let mut code = 0;
    if cli.file.is_some() || cli.trials.is_none() {
        let d = load(&cli.file)?.to_datum()?;
        let report = check_all(&d);
        if let Some(e) = &report.validation_error {
            return Err(e.clone());
        }
        out.push_str(&render::header(&d));
        out.push_str(&render::checks(&report));
        if let Some(e) = report.polygons.as_ref().and_then(|ps| ps.first_error()) {
            code = e.exit_code();
        } else if !report.all_hold() {
            code = EXIT_CHECK_FAILED;
        }
    }
    if let Some(trials) = cli.trials {
        let (text, failed) = random_suites(trials, cli.seed)?;
        out.push_str(&text);
        if failed && code == 0 {
            code = EXIT_CHECK_FAILED;
        }
    }
    Ok(Outcome { code, stdout: out, stderr: String::new() })
}

/// A random valid datum with HN records and a proportional tower attached.
pub fn random_checked_datum(rng: &mut ChaCha8Rng) -> Result<StructuredDatum> {
    let mut d = random_datum(rng)?;
    let hi = integral_hodge(&d)?.averaged;
    let (hp, hpi) = random_hn_records(rng, &d, &hi);
    d.hn_tower = Some(proportional_tower(&hp, 3));
    d.subobjects_p = Some(hp);
    d.subobjects_pi = Some(hpi);
    Ok(d)
}

/// Per-check tallies over `trials` random data.
fn random_suites(trials: usize, seed: u64) -> Result<(String, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally: BTreeMap<&'static str, [usize; 3]> = BTreeMap::new();
    let mut first_failure = None;
    for trial in 0..trials {
        let d = random_checked_datum(&mut rng)?;
        let report = check_all(&d);
        if let Some(e) = report.validation_error {
            return Err(Error::InternalMismatch(format!("random datum {trial} failed validation: {e}")));
        }
        if let Some(e) = report.polygons.as_ref().and_then(|ps| ps.first_error()) {
            return Err(e.clone());
        }
        for c in &report.checks {
            let slot = match &c.status {
                CheckStatus::Holds => 0,
                CheckStatus::Fails { witness } => {
                    first_failure.get_or_insert_with(|| format!("trial {trial}: {} at {witness}", c.name));
                    1
                }
                CheckStatus::Skipped { .. } => 2,
            };
            tally.entry(c.name).or_default()[slot] += 1;
        }
    }
    let mut out = format!("random suites: {trials} trials, seed {}\n", seed);
    for (name, [hold, fail, skip]) in &tally {
        out.push_str(&format!("{name:<52}{hold} hold, {fail} fail, {skip} skipped\n"));
    }
    if let Some(f) = &first_failure {
        out.push_str(&format!("first failure: {f}\n"));
    }
    Ok((out, first_failure.is_some()))
}

fn family(doc: &InputDocument, cli: &Cli) -> Result<Outcome> {
    let fam = doc.to_family()?;
    let sw = sweep(&fam, cli.grid)?;
    let mut out = format!(
        "family: p = {}, e = {}, f = {}, n = {}, domain {}, grid {}\n",
        fam.p, fam.e, fam.f, fam.n, fam.domain, cli.grid
    );
    out.push_str(&render::sweep(&sw));
    let mut code = if sw.continuity_ok() { 0 } else { EXIT_CHECK_FAILED };
    if let Some(s) = &cli.sublevel {
        let f0 = parse_polygon(s)?;
        let region = sublevel_region(&fam, &f0, cli.grid)?;
        out.push_str(&render::region(&f0, &region));
        if !region.warnings.is_empty() && code == 0 {
            code = EXIT_CHECK_FAILED;
        }
    }
    Ok(Outcome { code, stdout: out, stderr: String::new() })
}

fn plot(doc: &InputDocument) -> Result<Outcome> {
    let d = doc.to_datum()?;
    d.validate()?;
    let ps = compute_polygons(&d);
    let mut series = Vec::new();
    let mut add_poly = |label: &str, c: &Computed<Polygon>| {
        if let Computed::Value(p) = c {
            series.push(svg::Series { label: label.into(), vertices: p.to_function().vertices().to_vec() });
        }
    };
    let hi = match &ps.integral_hodge {
        Computed::Value(h) => Computed::Value(h.averaged.clone()),
        Computed::Skipped(s) => Computed::Skipped(s.clone()),
        Computed::Failed(e) => Computed::Failed(e.clone()),
    };
    add_poly("integral Hodge", &hi);
    add_poly("Hodge", &ps.hodge);
    add_poly("Pappas-Rapoport", &ps.pappas_rapoport);
    add_poly("Newton", &ps.newton);
    add_poly("dual integral Hodge", &ps.dual_integral_hodge);
    for (label, c) in [("HN(H[p])", &ps.hn_p), ("HN(H[pi])", &ps.hn_pi)] {
        if let Computed::Value(f) = c {
            series.push(svg::Series { label: label.into(), vertices: f.vertices().to_vec() });
        }
    }
    let n = rational(d.n as i64, 1);
    let top = d.endpoint().unwrap_or_else(|| n.clone());
    let title = format!("p = {}, e = {}, f = {}, n = {}", d.p(), d.e, d.f, d.n);
    let code = ps.first_error().map_or(0, Error::exit_code);
    Ok(Outcome { code, stdout: svg::plot(&title, &n, &top, &series), stderr: String::new() })
}
