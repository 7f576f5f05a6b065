//! End-to-end checks of the command-line binary against the shipped spec
//! corpus: exit codes, JSON report shape, output-directory handling, and
//! byte-for-byte determinism across repeated runs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_supstar"));
    c.env_remove("SUPSTAR_OUT_DIR");
    c
}

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .nth(2)
        .unwrap()
        .join("specs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    let mut c = bin();
    c.args(args);
    c.output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    // a human-readable summary precedes the JSON payload on stdout
    let text = String::from_utf8_lossy(&out.stdout);
    let start = text.find("\n{").map(|i| i + 1).unwrap_or(0);
    serde_json::from_str(&text[start..]).expect("stdout ends with JSON")
}

#[test]
fn validate_accepts_the_corpus() {
    for name in [
        "darboux.json",
        "curved.json",
        "quantum_abelian.json",
        "quantum_so2.json",
        "classical_abelian.json",
        "classical_twisted.json",
    ] {
        let out = run(&["validate", spec(name).to_str().unwrap()]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let v = stdout_json(&out);
        assert_eq!(v["pass"], serde_json::json!(true), "{name}");
        assert!(v["checks"].as_array().map_or(false, |c| !c.is_empty()));
    }
}

#[test]
fn validate_rejects_a_corrupted_chart() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(spec("curved.json")).unwrap()).unwrap();
    // break antisymmetry of the symplectic form
    let upper = v["omega"][0][1].clone();
    v["omega"][1][0] = upper;
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["pass"], serde_json::json!(false));
}

#[test]
fn malformed_rational_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(spec("darboux.json")).unwrap().replace("\"1\"", "\"3/0\"");
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text).unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn unrecognized_spec_shape_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"hello\": 1}").unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn star_reports_the_moyal_commutator_inputs() {
    let darboux = spec("darboux.json");
    let x = spec("x.json");
    let p = spec("p.json");
    let out = run(&[
        "star",
        darboux.to_str().unwrap(),
        x.to_str().unwrap(),
        p.to_str().unwrap(),
        "--order",
        "1",
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["order"], serde_json::json!(1));
    // x∗p has the classical term xp and the half-pairing term (i/2)λ
    let m = v["m"].as_array().unwrap();
    assert_eq!(m.len(), 2);
    assert!(!m[0]["terms"].as_array().unwrap().is_empty());
    assert!(!m[1]["terms"].as_array().unwrap().is_empty());
}

#[test]
fn bracket_agrees_between_closed_forms() {
    let out = run(&[
        "bracket",
        spec("curved.json").to_str().unwrap(),
        spec("x.json").to_str().unwrap(),
        spec("p.json").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["pass"], serde_json::json!(true));
}

#[test]
fn taylor_and_fedosov_r_run_on_the_curved_chart() {
    let out = run(&[
        "taylor",
        spec("curved.json").to_str().unwrap(),
        spec("x.json").to_str().unwrap(),
        "--trunc",
        "5",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["pass"], serde_json::json!(true));

    let out = run(&["fedosov-r", spec("curved.json").to_str().unwrap(), "--trunc", "5"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!(!v["r"]["terms"].as_array().unwrap().is_empty());
}

#[test]
fn check_runs_each_spec_kind() {
    let out = run(&[
        "check",
        spec("darboux.json").to_str().unwrap(),
        "--suite",
        "algebra",
        "--trials",
        "5",
        "--trunc",
        "5",
    ]);
    assert!(out.status.success());
    let out = run(&["check", spec("quantum_abelian.json").to_str().unwrap(), "--trials", "3"]);
    assert!(out.status.success());
    let out = run(&["check", spec("classical_twisted.json").to_str().unwrap(), "--trials", "3"]);
    assert!(out.status.success());
}

#[test]
fn brst_probe_prints_the_dimension_table() {
    let out = run(&[
        "brst",
        spec("classical_abelian.json").to_str().unwrap(),
        "--mode",
        "classical",
        "--probe-degree",
        "2",
        "--trials",
        "3",
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let probe = v["probe"].as_array().unwrap();
    assert_eq!(probe.len(), 5);
    assert_eq!(probe[2]["cohomology"], serde_json::json!(1));
    assert_eq!(probe[4]["dimension"], serde_json::json!(15));
}

#[test]
fn brst_mode_must_match_the_spec() {
    let out = run(&[
        "brst",
        spec("classical_abelian.json").to_str().unwrap(),
        "--mode",
        "quantum",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_dir_flag_and_env_var_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "validate",
        spec("darboux.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let flagged = std::fs::read_to_string(dir.path().join("validate.json")).unwrap();

    let env_dir = tempfile::tempdir().unwrap();
    let mut c = bin();
    c.args(["validate", spec("darboux.json").to_str().unwrap()]);
    c.env("SUPSTAR_OUT_DIR", env_dir.path());
    let out = c.output().unwrap();
    assert!(out.status.success());
    let via_env = std::fs::read_to_string(env_dir.path().join("validate.json")).unwrap();
    assert_eq!(flagged, via_env);
}

#[test]
fn reports_are_deterministic() {
    let twisted = spec("classical_twisted.json");
    let args = [
        "brst",
        twisted.to_str().unwrap(),
        "--mode",
        "classical",
        "--seed",
        "7",
        "--trials",
        "4",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
