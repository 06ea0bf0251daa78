use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn qvir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qvir")).args(args).output().expect("run qvir")
}

fn report(dir: &std::path::Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn all_exact_reference_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = qvir(&["all", "--q", "3/10", "--p", "3/5", "--mode", "exact", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = report(dir.path());
    assert_eq!(rep["all_pass"], true);
    assert_eq!(rep["parameters"]["mode"], "exact");
    for row in rep["rows"].as_array().unwrap() {
        assert!(row["truncation"].is_object());
    }
    let suites: Vec<&str> = rep["rows"].as_array().unwrap().iter().map(|r| r["suite"].as_str().unwrap()).collect();
    for s in ["coeffs", "classical", "classical_scan", "modes", "quantum", "residues", "nullspace", "shifted"] {
        assert!(suites.contains(&s), "missing suite {s}");
    }
}

#[test]
fn degenerate_point_has_zero_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let out = qvir(&["quantum", "verify", "--q", "3/10", "--p", "9/100", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let rep = report(dir.path());
    let rows = rep["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 729);
    assert!(rows.iter().all(|r| r["residual"] == "0"));
}

#[test]
fn regime_violation_is_rejected() {
    let out = qvir(&["coeffs", "--q", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("parameter"));
}

#[test]
fn higher_label_quantum_is_refused() {
    let out = qvir(&["quantum", "verify", "--k", "1"]);
    assert!(!out.status.success());
}

#[test]
fn failing_check_sets_exit_status() {
    // too few product factors for the tolerance in exact mode
    let out = qvir(&["quantum", "verify", "--prod-trunc", "1", "--window", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("checks failed"));
}

#[test]
fn reports_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = qvir(&["quantum", "residues", "--out", d.path().to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(
        fs::read(a.path().join("report.json")).unwrap(),
        fs::read(b.path().join("report.json")).unwrap()
    );
}

#[test]
fn csv_has_fixed_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = qvir(&["quantum", "shifted", "--format", "csv", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, "suite,check,n,m,r,s,residual,residual_approx,tolerance,pass,n_prod,l_max");
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn decimal_input_selects_float_mode() {
    let out = qvir(&["coeffs", "--q", "0.3", "--p", "0.6", "--format", "json"]);
    assert!(out.status.success());
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["parameters"]["mode"], "float256");
}

#[test]
fn low_precision_is_rejected() {
    let out = qvir(&["coeffs", "--mode", "float", "--precision", "64"]);
    assert!(!out.status.success());
}

#[test]
fn classical_scan_reports_sectors() {
    let out = qvir(&["classical", "scan", "--k", "1", "--format", "json"]);
    assert!(out.status.success());
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    let entries = rep["blocks"]["forced_zero_scan_k1"]["entries"].as_array().unwrap();
    let m0 = entries.iter().find(|e| e["m_total"] == 0).unwrap();
    assert_eq!(m0["status"], "FORCED_ZERO");
}
