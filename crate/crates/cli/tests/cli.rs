//! End-to-end tests of the binary: output contracts, exit codes, warning
//! behavior, and report determinism across thread counts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_futaki")
}

fn manifest_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../manifests")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn alpha_row_matches_recurrence() {
    let out = run(&["alpha", "--n", "3", "--d", "3", "--q", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "1, 2, 3");
}

#[test]
fn closed_invariant_on_cubic() {
    let man = manifest_dir().join("cubic.json");
    let out = run(&[
        "invariant",
        "--manifest",
        man.to_str().unwrap(),
        "--q",
        "1",
        "--route",
        "closed",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "-8");
}

#[test]
fn normalized_field_warning_and_zero() {
    let man = manifest_dir().join("example22.json");
    let out = run(&[
        "invariant",
        "--manifest",
        man.to_str().unwrap(),
        "--q",
        "1",
        "--route",
        "closed",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "0");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nonzero trace"), "stderr: {err}");
}

#[test]
fn missing_manifest_is_validation_error() {
    let out = run(&["invariant", "--manifest", "/no/such/file.json", "--q", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn untangent_field_is_validation_error() {
    let dir = std::env::temp_dir().join("futaki-cli-test-bad");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(
        &path,
        r#"{"n": 3,
           "polynomial": [
             {"coefficient": "1", "exponents": [1, 2, 0, 0]},
             {"coefficient": "1", "exponents": [0, 0, 2, 1]}],
           "field": {"lambda": ["1", "2", "3", "4"]}}"#,
    )
    .unwrap();
    let out = run(&["invariant", "--manifest", path.to_str().unwrap(), "--q", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_passes_on_hyperplane() {
    let man = manifest_dir().join("hyperplane.json");
    let out = run(&[
        "verify",
        "--manifest",
        man.to_str().unwrap(),
        "--points",
        "40",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("overall: pass"), "output: {text}");
}

#[test]
fn calibrate_reports_degree() {
    let man = manifest_dir().join("quadric-cp3.json");
    let out = run(&[
        "calibrate",
        "--manifest",
        man.to_str().unwrap(),
        "--samples",
        "2000",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("expected 2"));
}

#[test]
fn report_is_deterministic_across_threads() {
    let man = manifest_dir().join("quadric-cp3.json");
    let dir = std::env::temp_dir().join("futaki-cli-test-report");
    std::fs::create_dir_all(&dir).unwrap();
    let mut bytes: Vec<Vec<u8>> = Vec::new();
    for (name, threads) in [("a.json", "1"), ("b.json", "1"), ("c.json", "4")] {
        let path = dir.join(name);
        let out = run(&[
            "report",
            "--manifest",
            man.to_str().unwrap(),
            "--all",
            "--samples",
            "1500",
            "--points",
            "30",
            "--threads",
            threads,
            "-o",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        bytes.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(bytes[0], bytes[1], "same-seed runs differ");
    assert_eq!(bytes[0], bytes[2], "serial vs parallel runs differ");
    // The document parses and its exact fields round-trip bit-for-bit.
    let doc = futaki::ReportDocument::from_json(std::str::from_utf8(&bytes[0]).unwrap()).unwrap();
    assert_eq!(doc.kappa, "0");
    assert_eq!(doc.invariants[0].closed, doc.invariants[0].coeff_route);
}
