use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/v1")
}

fn qcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcert")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Value) {
    let out = qcert(args);
    let code = out.status.code().expect("exit code");
    let v =
        serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (code, v)
}

fn f(v: &Value, path: &[&str]) -> f64 {
    path.iter().fold(v, |acc, k| &acc[*k]).as_f64().expect("number")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

#[test]
fn bell_verify_reports_values() {
    let (code, v) = report(&["bell-verify", "--n", "2", "--m", "2", "--d", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["pass"], Value::Bool(true));
    assert!((f(&v, &["values", "quantum_value"]) - 4.0).abs() < 1e-9);
    assert_eq!(f(&v, &["values", "quantum_bound_stated"]), 8.0);
    assert!((f(&v, &["values", "classical_bound"]) - 3.098076).abs() < 1e-6);
    assert!(f(&v, &["values", "sos_residual"]) < 1e-9);
}

#[test]
fn bell_verify_three_parties_has_variants() {
    let (code, v) = report(&["bell-verify", "--n", "3", "--m", "2", "--d", "2"]);
    assert_eq!(code, 0);
    let variants = v["values"]["sos_variant_residuals"].as_object().expect("variants");
    assert!(!variants.is_empty());
}

#[test]
fn gi_check_on_bundled_triple() {
    let (code, v) = report(&["gi-check", "--obs-file", &fixture("gi_triple_d5.ops"), "--expect", "gi"]);
    assert_eq!(code, 0);
    assert_eq!(v["values"]["is_gi"], Value::Bool(true));
    let pairs = v["values"]["pairs"].as_object().expect("pairs");
    assert_eq!(pairs.len(), 3);
    assert!(pairs.values().all(|p| p["is_gi"] == Value::Bool(false)));

    let (code, v) = report(&["gi-check", "--obs-file", &fixture("gi_triple_d5.ops"), "--expect", "not-gi"]);
    assert_eq!(code, 1);
    assert_eq!(v["pass"], Value::Bool(false));
}

#[test]
fn gi_check_block_pair_witness() {
    let (code, v) = report(&["gi-check", "--obs-file", &fixture("block_pair_d4.ops"), "--expect", "not-gi"]);
    assert_eq!(code, 0);
    assert_eq!(f(&v, &["values", "commutant_dimension"]), 2.0);
    assert_eq!(f(&v, &["values", "witness_rank"]), 2.0);
}

#[test]
fn randomness_hw_d4() {
    let (code, v) = report(&["randomness", "--kind", "hw", "--d", "4"]);
    assert_eq!(code, 0);
    assert!((f(&v, &["values", "min_entropy_bits"]) - 4.0).abs() < 1e-9);
    assert_eq!(v["values"]["certification_assumed"], Value::Bool(true));
}

#[test]
fn steering_modes() {
    let (code, v) = report(&["steering-verify", "--mode", "gi", "--d", "3"]);
    assert_eq!(code, 0);
    assert!((f(&v, &["values", "quantum_value"]) - 4.0).abs() < 1e-9);
    let (code, v) = report(&["steering-verify", "--mode", "alpha", "--d", "3", "--alpha", "0.3,0.5,0.8"]);
    assert_eq!(code, 0);
    assert!(f(&v, &["values", "lhs_bound"]) < 3.0);
    let out = qcert(&["steering-verify", "--mode", "alpha", "--d", "4", "--alpha", "0.3,0.5,0.8"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn povm_and_mub() {
    for args in [
        vec!["povm-verify", "--kind", "hw", "--d", "3"],
        vec!["povm-verify", "--kind", "partial", "--d", "6"],
        vec!["mub-check", "--d", "5"],
    ] {
        let (code, _) = report(&args);
        assert_eq!(code, 0, "{args:?}");
    }
    let out = qcert(&["povm-verify", "--kind", "hw", "--d", "2", "--nu", "1,0;0,0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mub_check_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bases.ops");
    let s = 1.0 / 2f64.sqrt();
    std::fs::write(&path, format!("dim=2\n1,0\n0,0\n0,0\n1,0\ndim=2\n{s},0\n{s},0\n{s},0\n-{s},0\n")).unwrap();
    let (code, _) = report(&["mub-check", "--d", "2", "--bases-file", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    std::fs::write(&path, "dim=2\n1,0\n0,0\n0,0\n1,0\ndim=2\n0,0\n1,0\n1,0\n0,0\n").unwrap();
    let (code, v) = report(&["mub-check", "--d", "2", "--bases-file", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(v["assertions"]["mutually_unbiased"]["pass"], Value::Bool(false));
}

#[test]
fn robustness_regime() {
    let (code, v) = report(&["robustness", "--d", "2", "--theta", "0.01", "--l", "1"]);
    assert_eq!(code, 0);
    assert!(f(&v, &["values", "epsilon"]) >= 0.0);
    let (code, v) = report(&["robustness", "--d", "3", "--theta", "0.5"]);
    assert_eq!(code, 1);
    assert_eq!(v["values"]["in_regime"], Value::Bool(false));
}

#[test]
fn scenario_fixtures_pass() {
    let mut names: Vec<String> = std::fs::read_dir(fixtures())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".json") && (n.starts_with("selftest_") || n.starts_with("classical_")))
        .collect();
    names.sort();
    assert!(names.len() >= 6);
    for name in names {
        let cmd = if name.starts_with("selftest_") { "selftest-check" } else { "classical-bound" };
        let (code, v) = report(&[cmd, "--scenario", &fixture(&name)]);
        assert_eq!(code, 0, "{name}: {v}");
    }
}

#[test]
fn selftest_detects_perturbed_state() {
    let dir = tempfile::tempdir().unwrap();
    let mut amps = [(0.0, 0.0); 9];
    for i in 0..3 {
        amps[i * 3 + i] = (0.99f64.sqrt() / 3f64.sqrt(), 0.0);
    }
    amps[1] = (0.1, 0.0);
    let body: String = amps.iter().map(|(re, im)| format!("{re},{im}\n")).collect();
    std::fs::write(dir.path().join("state.vec"), format!("dim=9\n{body}")).unwrap();
    let scen = dir.path().join("scenario.json");
    std::fs::write(&scen, r#"{ "scenario": "steering-gi", "d": 3, "state_file": "state.vec" }"#).unwrap();
    let (code, v) = report(&["selftest-check", "--scenario", scen.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(f(&v, &["values", "canonical_fidelity"]) < 1.0);
}

#[test]
fn reports_are_byte_identical() {
    let args = ["steering-verify", "--mode", "alpha", "--d", "4", "--alpha", "0.4,0.6,0.48,0.5038", "--seed", "7"];
    let a = qcert(&args);
    let b = qcert(&args);
    assert_eq!(a.stdout, b.stdout);
    let single = Command::new(env!("CARGO_BIN_EXE_qcert")).args(args).env("QCERT_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, single.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(!text.contains("wall_time"));
}

#[test]
fn out_flag_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = qcert(&["mub-check", "--d", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let direct = qcert(&["mub-check", "--d", "3"]);
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(qcert(&["bogus"]).status.code(), Some(2));
    assert_eq!(qcert(&["bell-verify", "--n", "2"]).status.code(), Some(2));
    assert_eq!(qcert(&["bell-verify", "--n", "2", "--m", "2", "--d", "1"]).status.code(), Some(2));
    assert_eq!(qcert(&["gi-check", "--obs-file", "/nonexistent/file"]).status.code(), Some(2));
    let bad = Command::new(env!("CARGO_BIN_EXE_qcert"))
        .args(["mub-check", "--d", "2"])
        .env("QCERT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn malformed_operator_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ops");
    std::fs::write(&path, "dim=2\n1,0\n0,0\n").unwrap();
    let out = qcert(&["gi-check", "--obs-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("expected 4 entries"));
}

#[test]
fn exported_fixtures_match_bundled() {
    for (name, file) in [("gi-triple-d5", "gi_triple_d5.ops"), ("block-pair-d4", "block_pair_d4.ops")] {
        let out = qcert(&["export-fixture", "--name", name]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(out.stdout, std::fs::read(fixtures().join(file)).unwrap(), "{name}");
    }
}
