//! Exit codes and output formats of the `szego` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn szego(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_szego"))
        .args(args)
        .current_dir(dir)
        .env_remove("SZEGO_SEED")
        .output()
        .expect("spawn szego")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn spectrum_of_geometric_symbol() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "u.json", r#"{"num":[[1,0]],"den":[[1,0],[-0.5,0]]}"#);
    let out = szego(&["spectrum", "u.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["lambda"][0].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-10);
    assert!((v["mu"][0].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-10);
}

#[test]
fn non_generic_symbol_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "u.json", r#"{"coeffs":[[0.1,0],[1,0]]}"#);
    let out = szego(&["spectrum", "u.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("mu-rank deficiency"), "{msg}");
}

#[test]
fn io_and_parse_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.json", r#"{"coeffs":[[0.1,0"#);
    assert_eq!(szego(&["spectrum", "bad.json"], dir.path()).status.code(), Some(1));
    assert_eq!(szego(&["spectrum", "missing.json"], dir.path()).status.code(), Some(1));
    assert_eq!(szego(&["spectrum"], dir.path()).status.code(), Some(1));
    assert_eq!(szego(&["verify", "--suite", "nope"], dir.path()).status.code(), Some(1));
    write(dir.path(), "other.json", r#"{"values":[1]}"#);
    assert_eq!(szego(&["spectrum", "other.json"], dir.path()).status.code(), Some(1));
    assert_eq!(szego(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn bad_seed_variable_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_szego"))
        .args(["verify", "--suite", "trace", "--n", "1"])
        .current_dir(dir.path())
        .env("SZEGO_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_variable_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_szego"))
        .args(["verify", "--suite", "trace", "--n", "2", "--seed", "1"])
        .current_dir(dir.path())
        .env("SZEGO_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["seed"].as_u64(), Some(7));
}

#[test]
fn hankel_build_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "sa.json", r#"{"zeta":[2],"gamma":[1]}"#);
    let out = szego(&["hankel-build", "sa.json", "--selfadjoint"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["pass"], Value::Bool(true));
    for (k, c) in v["symbol"]["coeffs"].as_array().unwrap().iter().take(20).enumerate() {
        assert!((c[0].as_f64().unwrap() - 1.5 * 0.5f64.powi(k as i32)).abs() < 1e-12);
        assert_eq!(c[1].as_f64().unwrap(), 0.0);
    }

    write(
        dir.path(),
        "t.json",
        &format!(r#"{{"lambda":[2],"mu":[1],"phi":[0],"theta":[{}]}}"#, std::f64::consts::PI),
    );
    let out = szego(&["hankel-build", "t.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for (k, c) in v["symbol"]["coeffs"].as_array().unwrap().iter().take(20).enumerate() {
        assert!((c[0].as_f64().unwrap() - 1.5 * (-0.5f64).powi(k as i32)).abs() < 1e-12);
    }
}

#[test]
fn hankel_build_rejects_and_flags_failures() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.json", r#"{"lambda":[1],"mu":[2],"phi":[0],"theta":[0]}"#);
    assert_eq!(szego(&["hankel-build", "bad.json"], dir.path()).status.code(), Some(2));
    // A four-term truncation cannot reproduce the spectrum.
    write(dir.path(), "t.json", r#"{"lambda":[2],"mu":[1],"phi":[0],"theta":[0]}"#);
    let out = szego(&["hankel-build", "t.json", "--m", "4"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["report"]["pass"], Value::Bool(false));
}

#[test]
fn reconstruct_reports_model_and_rational() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "s.json", r#"{"lambda":[2],"mu":[1],"phi":[0],"theta":[0]}"#);
    let out = szego(&["reconstruct", "s.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let x = v["model"]["X"][0][0].as_f64().unwrap();
    let y = v["model"]["Y"][0][0].as_f64().unwrap();
    assert!((x * y - 1.5).abs() < 1e-12);
    assert!((v["rational"]["den"][1][0].as_f64().unwrap() + 0.5).abs() < 1e-12);
    assert!(v["symbol"]["coeffs"].as_array().unwrap().len() >= 64);
}

#[test]
fn evolve_both_reports_deviation() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "u.json", r#"{"num":[[1,0]],"den":[[1,0],[-0.5,0]]}"#);
    let out = szego(&["evolve", "u.json", "--t", "10", "--method", "both", "--out", "run"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: Value = serde_json::from_slice(&std::fs::read(dir.path().join("run.json")).unwrap()).unwrap();
    assert!(manifest["max_deviation"].as_f64().unwrap() <= 1e-5);
    let csv = std::fs::read_to_string(dir.path().join("run.direct.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("t,re_c0,im_c0,") && header.ends_with(",J2,J4,M,E,l2_dev"));
    assert_eq!(csv.lines().count(), 1 + 1001);
}

#[test]
fn evolve_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "u.json", r#"{"num":[[1,0]],"den":[[1,0],[-0.5,0]]}"#);
    // T = 0 returns the input unchanged.
    let out = szego(&["evolve", "u.json", "--t", "0", "--method", "exact", "--out", "zero"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("zero.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("0,1,0,0.5,0,0.25,0,0.125,0,"));
    // dt not dividing T: the last sample sits at floor(T/dt) dt.
    let out = szego(
        &["evolve", "u.json", "--t", "1", "--dt", "0.3", "--every", "1", "--method", "direct", "--out", "odd"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let manifest: Value = serde_json::from_slice(&std::fs::read(dir.path().join("odd.json")).unwrap()).unwrap();
    assert!((manifest["last_time"].as_f64().unwrap() - 0.9).abs() < 1e-12);
    assert_eq!(manifest["samples"].as_u64(), Some(4));
    // The exact path refuses non-generic data.
    write(dir.path(), "z.json", r#"{"coeffs":[[0.1,0],[1,0]]}"#);
    let out = szego(&["evolve", "z.json", "--t", "1", "--method", "exact", "--out", "z"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn instability_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = szego(
        &["experiment", "instability", "--q", "0", "--eps", "0.1", "--horizon", "2", "--out", "beat"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let summary: Value = serde_json::from_slice(&std::fs::read(dir.path().join("beat.json")).unwrap()).unwrap();
    for key in ["r_plus", "r_minus", "gamma_plus", "gamma_minus", "f_of_s", "empirical_avg"] {
        assert!(summary[key].is_number(), "{key}");
    }
    assert!((summary["r_plus"].as_f64().unwrap() - 1.105124922).abs() < 1e-9);
    let csv = std::fs::read_to_string(dir.path().join("beat.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,re_J1,im_J1,abs_J1_sq"));
    assert_eq!(csv.lines().count(), 1 + 2001);

    let out = szego(&["experiment", "instability", "--q", "1.5", "--eps", "0.1", "--horizon", "2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_report_is_ordered_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = szego(&["verify", "--suite", "roundtrip", "--n", "8", "--jobs", "4"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let cases: Vec<u64> = v["cases"].as_array().unwrap().iter().map(|c| c["case"].as_u64().unwrap()).collect();
    assert_eq!(cases, (0..8).collect::<Vec<_>>());
    assert_eq!(v["pass"], Value::Bool(true));
    assert_eq!(v["suite"], Value::String("roundtrip".into()));
}
