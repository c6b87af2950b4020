use std::path::PathBuf;
use std::process::Command;

use polyinv::cli::schema::{datum_document, parse_input};
use polyinv::invariants::{compute_polygons, integral_hodge};
use polyinv::Error;

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn polyinv(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_polyinv"))
        .args(args)
        .env_remove("POLYINV_PRECISION_M")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write_temp(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn shipped_example_round_trips() {
    let text = std::fs::read(example("cubic.json")).unwrap();
    let doc = parse_input(&text).unwrap();
    let d = doc.to_datum().unwrap();
    let again = serde_json::to_vec(&datum_document(&d)).unwrap();
    let d2 = parse_input(&again).unwrap().to_datum().unwrap();
    assert_eq!(d.pi_on_omega, d2.pi_on_omega);
    assert_eq!(d.dieudonne, d2.dieudonne);
    assert_eq!(d.r_tau, d2.r_tau);
    assert_eq!(compute_polygons(&d), compute_polygons(&d2));
    assert_eq!(integral_hodge(&d2).unwrap().averaged.slopes()[1].to_string(), "1/6");
}

#[test]
fn entry_beyond_precision_is_a_shorthand_error() {
    let doc = br#"{"version":"1","model":{"p":5,"ram_index":6,"precision":1},
        "datum":{"e":1,"f":1,"n":1,"pi_on_omega":[[["u^7"]]]}}"#;
    let err = parse_input(doc).unwrap().to_datum().unwrap_err();
    assert!(matches!(err, Error::Shorthand { .. }), "{err:?}");
}

#[test]
fn unknown_key_is_named() {
    let doc = br#"{"version":"1","model":{"p":5,"ram_index":6},
        "datum":{"e":1,"f":1,"n":1,"pi_matrix":[]}}"#;
    match parse_input(doc) {
        Err(Error::Schema { path, reason }) => {
            assert_eq!(path, "datum.pi_matrix");
            assert!(reason.contains("pi_matrix"));
        }
        other => panic!("{other:?}"),
    }
    let doc = br#"{"version":"2","model":{"p":5,"ram_index":6},"datum":{"e":1,"f":1,"n":1}}"#;
    assert!(matches!(parse_input(doc), Err(Error::Schema { .. })));
}

#[test]
fn check_on_the_cubic_example() {
    let path = example("cubic.json");
    let (code, out, _) = polyinv(&["check", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("integral Hodge              (5/6, 1/6) ~ (0.833333, 0.166667)"), "{out}");
    assert!(out.contains("Pappas-Rapoport             (1, 0)"), "{out}");
    let line = out.lines().find(|l| l.starts_with("Hdg^int <= PR ")).unwrap();
    assert!(line.ends_with("holds"));
}

#[test]
fn family_sublevel_region() {
    let path = example("cubic-family.json");
    let (code, out, _) = polyinv(&["family", path.to_str().unwrap(), "--grid", "8", "--sublevel", "2/3,1/3"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("sublevel region of (2/3, 1/3): [1/3, 1/2)"), "{out}");
    assert!(out.contains("continuity: continuous"));
    assert!(out.contains("slope 1: 1 - s on [0, 1/2]"), "{out}");
}

#[test]
fn missing_r_tau_is_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_temp(
        &dir,
        "d.json",
        r#"{"version":"1","model":{"p":5,"ram_index":2,"precision":8},
            "datum":{"e":2,"f":1,"n":2,"pi_on_omega":[[["u",0],[0,"u"]]]}}"#,
    );
    let (code, out, _) = polyinv(&["compute", &f]);
    assert_eq!(code, 0);
    assert!(out.contains("Pappas-Rapoport             skipped: r_tau absent"), "{out}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // a subobject above Hdg^int makes a check fail
    let failing = write_temp(
        &dir,
        "fail.json",
        r#"{"version":"1","model":{"p":5,"ram_index":6,"precision":12},
            "datum":{"e":3,"f":1,"n":2,"pi_on_omega":[[[0,0,"u^5"],[1,0,0],[0,"u",0]]],
                     "r_tau":[1,1,1],"subobjects_p":[{"height":1,"degree":"1"}]}}"#,
    );
    let (code, out, _) = polyinv(&["check", &failing]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("FAILS at x = 1/3"), "{out}");
    assert_eq!(polyinv(&["compute", &failing]).0, 0);

    let bad = write_temp(&dir, "bad.json", r#"{"version":"1","model":{"p":4,"ram_index":1},"datum":{"e":1,"f":1,"n":1}}"#);
    for cmd in ["compute", "check", "plot"] {
        assert_eq!(polyinv(&[cmd, &bad]).0, 2, "{cmd}");
    }
    assert_eq!(polyinv(&["family", &bad]).0, 2);
    assert_eq!(polyinv(&["compute", "/nonexistent/x.json"]).0, 2);

    let singular = write_temp(
        &dir,
        "singular.json",
        r#"{"version":"1","model":{"p":5,"ram_index":2,"precision":4},
            "datum":{"e":2,"f":1,"n":1,"pi_on_omega":[[[0]]]}}"#,
    );
    for cmd in ["compute", "check", "plot"] {
        assert_eq!(polyinv(&[cmd, &singular]).0, 3, "{cmd}");
    }

    let too_big = write_temp(
        &dir,
        "big.json",
        r#"{"version":"1","model":{"p":3,"ram_index":2,"precision":8},
            "datum":{"e":2,"f":1,"n":1,"pi_on_omega":[[["u",0,0],[0,"u",0],[0,0,"u"]]]}}"#,
    );
    for cmd in ["compute", "check", "plot"] {
        assert_eq!(polyinv(&[cmd, &too_big]).0, 4, "{cmd}");
    }

    // a datum given to the family command, and vice versa
    let cubic = example("cubic.json");
    assert_eq!(polyinv(&["family", cubic.to_str().unwrap()]).0, 2);
    let fam = example("cubic-family.json");
    assert_eq!(polyinv(&["compute", fam.to_str().unwrap()]).0, 2);
    assert_eq!(polyinv(&["family", fam.to_str().unwrap(), "--sublevel", "1,1"]).0, 1);
}

#[test]
fn random_suites_from_the_command_line() {
    let (code, out, _) = polyinv(&["check", "--trials", "20", "--seed", "3"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("random suites: 20 trials, seed 3"));
    assert!(out.contains("Hdg^int <= PR"));
    assert!(!out.contains("first failure"));
}

#[test]
fn reports_are_deterministic() {
    for (cmd, file) in [("check", "cubic.json"), ("compute", "of-module.json"), ("plot", "wild-p2.json")] {
        let path = example(file);
        let a = polyinv(&[cmd, path.to_str().unwrap()]);
        let b = polyinv(&[cmd, path.to_str().unwrap()]);
        assert_eq!(a, b);
    }
    let path = example("diagonal-family.json");
    let a = polyinv(&["family", path.to_str().unwrap(), "--grid", "6"]);
    assert_eq!(a, polyinv(&["family", path.to_str().unwrap(), "--grid", "6"]));
    assert_eq!(a.0, 0);
}

#[test]
fn plot_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.svg");
    let path = example("cubic.json");
    let (code, stdout, _) = polyinv(&["plot", path.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let svg = std::fs::read_to_string(out).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.trim_end().ends_with("</svg>"));
    for label in ["integral Hodge", "Hodge", "Pappas-Rapoport", "Newton", "dual integral Hodge"] {
        assert!(svg.contains(&format!(">{label}</text>")), "{label}");
    }
    assert_eq!(svg.matches("<polyline").count(), 5);
}

#[test]
fn precision_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_temp(
        &dir,
        "d.json",
        r#"{"version":"1","model":{"p":5,"ram_index":2},
            "datum":{"e":2,"f":1,"n":2,"pi_on_omega":[[["u",0],[0,"u"]]],"r_tau":[1,1]}}"#,
    );
    let (_, out, _) = polyinv(&["compute", &f]);
    assert!(out.contains("M = 24"), "{out}");
    let run = Command::new(env!("CARGO_BIN_EXE_polyinv"))
        .args(["compute", &f])
        .env("POLYINV_PRECISION_M", "9")
        .output()
        .unwrap();
    assert!(String::from_utf8(run.stdout).unwrap().contains("M = 9"));
}

#[test]
fn shipped_schemas_are_json() {
    for name in ["datum.v1.schema.json", "family.v1.schema.json"] {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schema").join(name);
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(v["properties"]["version"]["const"], "1");
    }
}
