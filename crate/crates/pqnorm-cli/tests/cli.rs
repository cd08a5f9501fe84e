//! End-to-end checks of the CLI contract: JSON on stdout, exit codes, and
//! deterministic replay.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqnorm"))
        .args(args)
        .env_remove("PQNORM_SEED")
        .env_remove("PQNORM_TOL")
        .output()
        .expect("binary runs")
}

#[test]
fn norm_of_zero_element() {
    let elem = r#"{"space":{"base":{"kind":"lp","dim":2,"p":1},"quantization":{"kind":"max"}},"terms":[]}"#;
    let out = run(&["norm", "--in", elem]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    assert_eq!(v["lower"], 0.0);
    assert_eq!(v["upper"], 0.0);
}

#[test]
fn norm_scalar_schatten_two() {
    // diag(3, 4) in ^(2)C: sqrt(9 + 16) = 5.
    let elem = r#"{"space":{"base":{"kind":"lp","dim":1,"p":2},"quantization":{"kind":"schatten","p":2}},
        "terms":[{"matrix":[[[3,0],[0,0]],[[0,0],[4,0]]],"vector":[[1,0]]}]}"#;
    let out = run(&["norm", "--in", elem]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["lower"].as_f64().unwrap() - 5.0).abs() < 1e-9);
    assert!((v["upper"].as_f64().unwrap() - 5.0).abs() < 1e-9);
}

#[test]
fn exit_codes_parse_and_semantic() {
    let out = run(&["norm", "--in", "{not json"]);
    assert_eq!(out.status.code(), Some(2));

    let bad_dims = r#"{"space":{"base":{"kind":"lp","dim":2,"p":1},"quantization":{"kind":"min"}},
        "terms":[{"matrix":[[[1,0]]],"vector":[[1,0]]}]}"#;
    let out = run(&["norm", "--in", bad_dims]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn vn_report_shows_gap_and_triangle_failure() {
    let dir = std::env::temp_dir().join("pqnorm_cli_vn_test");
    let out = run(&["vn", "--n", "2", "--m", "1", "--dir", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["reference"]["pop"], 2.0);
    assert_eq!(v["reference"]["op"], 4.0);
    assert!((v["op_witness"].as_f64().unwrap() - 4.0).abs() < 1e-8);
    assert_eq!(v["triangle"]["triangle_inequality_holds"], false);
    // element files are valid inputs for `norm`
    let vn_file = dir.join("vn2_pop.json");
    let out = run(&["norm", "--in", vn_file.to_str().unwrap()]);
    assert!(out.status.success());

    // n = 1: no gap (1 vs 1)
    let out = run(&["vn", "--n", "1", "--dir", dir.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["gap_absent"], true);
}

#[test]
fn verify_quick_passes_and_replays_identically() {
    let a = run(&["verify", "--profile", "quick", "--seed", "0"]);
    assert_eq!(a.status.code(), Some(0));
    let b = run(&["verify", "--profile", "quick", "--seed", "0"]);
    assert_eq!(a.stdout, b.stdout, "replays must be byte-identical");
}

#[test]
fn verify_with_tampered_tolerance_fails() {
    let out = run(&["verify", "--profile", "quick", "--seed", "0", "--tol", "1e-15"]);
    assert_eq!(out.status.code(), Some(4));
    // the report itself is still valid JSON on stdout
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_pass"], false);
}
