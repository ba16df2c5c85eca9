use std::fs;
use std::path::Path;

use disclab::cli::{run, EXIT_ERROR, EXIT_OK, EXIT_REFUTED};

fn disclab(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("disclab").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn tight_report_has_unit_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let mat = dir.path().join("a.mat");
    assert_eq!(disclab(&["gen", "tight", "--out", s(&mat)]).0, EXIT_OK);
    assert_eq!(fs::read_to_string(&mat).unwrap(), "1 1\n1\n");
    let (code, out, _) = disclab(&["report", "--in", s(&mat), "--seed", "7"]);
    assert_eq!(code, EXIT_OK);
    let r: serde_json::Value = serde_json::from_str(&out).unwrap();
    let root = r["primal"]["sqrt_value"].as_f64().unwrap();
    assert!((1.0 - 1e-6..=1.0).contains(&root));
    assert!(r["dual"]["D"].as_f64().unwrap() >= 1.0 - 1e-6);
    assert!(r["gap"].as_f64().unwrap() <= 2e-6);
    assert!(r["timings"].is_object());
}

#[test]
fn trivial_certificate_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let mat = dir.path().join("a.mat");
    let cert = dir.path().join("trivial.cert");
    fs::write(&mat, "2 3\n1 0 0.5\n0 1 0.5\n").unwrap();
    fs::write(&cert, r#"{"p": [0.5, 0.5], "w": [0, 0, 0], "D": 0}"#).unwrap();
    let (code, out, _) = disclab(&["cert-verify", "--in", s(&mat), "--cert", s(&cert)]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "valid, D = 0");
}

#[test]
fn overclaimed_certificate_is_refuted() {
    let dir = tempfile::tempdir().unwrap();
    let mat = dir.path().join("a.mat");
    let cert = dir.path().join("c.cert");
    fs::write(&mat, "1 1\n1\n").unwrap();
    fs::write(&cert, r#"{"p": [1], "w": [1.1], "D": 1.05}"#).unwrap();
    let (code, out, _) = disclab(&["cert-verify", "--in", s(&mat), "--cert", s(&cert)]);
    assert_eq!(code, EXIT_REFUTED);
    assert!(out.starts_with("invalid"));
}

#[test]
fn witness_against_overweight_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let mat = dir.path().join("id2.mat");
    let cert = dir.path().join("overweight.cert");
    fs::write(&mat, "2 2\n1 0\n0 1\n").unwrap();
    fs::write(&cert, r#"{"p": [0.5, 0.5], "w": [0.6, 0.6], "D": 1.0954451150103321}"#).unwrap();
    let (code, out, _) = disclab(&["witness", "--in", s(&mat), "--cert", s(&cert)]);
    assert_eq!(code, EXIT_OK);
    let w: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((w["lhs"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((w["rhs"].as_f64().unwrap() - 0.6).abs() < 1e-12);

    // Trace refuses: the containment does not hold.
    let (code, _, err) = disclab(&["trace", "--in", s(&mat), "--cert", s(&cert)]);
    assert_eq!(code, EXIT_REFUTED);
    assert!(err.contains("containment"));
}

#[test]
fn witness_needs_overweight() {
    let dir = tempfile::tempdir().unwrap();
    let mat = dir.path().join("id2.mat");
    let cert = dir.path().join("c.cert");
    fs::write(&mat, "2 2\n1 0\n0 1\n").unwrap();
    fs::write(&cert, r#"{"p": [0.5, 0.5], "w": [0.5, 0.5], "D": 1}"#).unwrap();
    assert_eq!(disclab(&["witness", "--in", s(&mat), "--cert", s(&cert)]).0, EXIT_ERROR);
    let (code, out, _) = disclab(&["trace", "--in", s(&mat), "--cert", s(&cert)]);
    assert_eq!(code, EXIT_OK);
    let t: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(t["sum_bound_holds"], serde_json::Value::Bool(true));
}

#[test]
fn report_is_deterministic_without_timings() {
    let dir = tempfile::tempdir().unwrap();
    let mat = dir.path().join("g.mat");
    let args = ["gen", "gaussian", "--rows", "5", "--cols", "6", "--seed", "4", "--out", s(&mat)];
    assert_eq!(disclab(&args).0, EXIT_OK);
    let run_report = || disclab(&["report", "--in", s(&mat), "--seed", "3", "--no-timings", "--trials", "2"]);
    let (c1, a, _) = run_report();
    let (c2, b, _) = run_report();
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    assert_eq!(a, b);
    assert!(!a.contains("timings\": {"));
}

#[test]
fn pipeline_solve_round_search_verify() {
    let dir = tempfile::tempdir().unwrap();
    let mat = dir.path().join("bf.mat");
    let u = dir.path().join("u.mat");
    let cert = dir.path().join("c.cert");
    let gen = ["gen", "beck-fiala", "--vertices", "8", "--edges", "5", "--degree", "2", "--scaled", "--out", s(&mat)];
    assert_eq!(disclab(&gen).0, EXIT_OK);

    let (code, out, _) = disclab(&["solve", "--in", s(&mat), "--trials", "2", "--coloring", s(&u)]);
    assert_eq!(code, EXIT_OK);
    let sol: serde_json::Value = serde_json::from_str(&out).unwrap();
    let root = sol["sqrt_value"].as_f64().unwrap();

    let (code, out, _) = disclab(&["round", "--in", s(&mat), "--coloring", s(&u), "--trials", "20"]);
    assert_eq!(code, EXIT_OK);
    let rounded: serde_json::Value = serde_json::from_str(&out).unwrap();

    let (code, out, _) = disclab(&["brute", "--in", s(&mat)]);
    assert_eq!(code, EXIT_OK);
    let exact: serde_json::Value = serde_json::from_str(&out).unwrap();
    let disc = exact["value"].as_f64().unwrap();
    assert!(root <= disc + 1e-6);
    assert!(disc <= rounded["value"].as_f64().unwrap());

    assert_eq!(disclab(&["cert-search", "--in", s(&mat), "--iters", "10", "--out", s(&cert)]).0, EXIT_OK);
    let (code, out, _) = disclab(&["cert-verify", "--in", s(&mat), "--cert", s(&cert)]);
    assert_eq!(code, EXIT_OK, "{out}");
    let (code, _, _) = disclab(&["trace", "--in", s(&mat), "--cert", s(&cert)]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn usage_and_io_errors_exit_one() {
    assert_eq!(disclab(&["frobnicate"]).0, EXIT_ERROR);
    assert_eq!(disclab(&["solve"]).0, EXIT_ERROR);
    let (code, _, err) = disclab(&["solve", "--in", "/nonexistent/a.mat"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.starts_with("error:"));

    let dir = tempfile::tempdir().unwrap();
    let mat = dir.path().join("bad.mat");
    fs::write(&mat, "2 2\n1 2\n3\n").unwrap();
    let (code, _, err) = disclab(&["brute", "--in", s(&mat)]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn brute_limit_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let mat = dir.path().join("g.mat");
    assert_eq!(disclab(&["gen", "gaussian", "--rows", "2", "--cols", "6", "--out", s(&mat)]).0, EXIT_OK);
    assert_eq!(disclab(&["brute", "--in", s(&mat), "--limit", "5"]).0, EXIT_ERROR);
}

#[test]
fn table_output() {
    let dir = tempfile::tempdir().unwrap();
    let mat = dir.path().join("a.mat");
    assert_eq!(disclab(&["gen", "ap", "--size", "6", "--scaled", "--out", s(&mat)]).0, EXIT_OK);
    let (code, out, _) = disclab(&["report", "--in", s(&mat), "--table", "--trials", "2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().any(|l| l.starts_with("disc (exact)")));
}
