//! End-to-end tests of the binary: subcommand behavior, exit codes, JSON
//! reports, and the seed override.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use qpg_core::magic::MagicUnitary;
use qpg_core::numerics::ComplexMatrix;

fn qpg() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qpg"));
    // Keep the environment out of tests that do not opt in.
    cmd.env_remove("QPG_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    qpg().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is utf-8")
}

fn repo_scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

#[test]
fn reduce_applies_defining_relations() {
    let output = run(&["reduce", "a(1,1)*a(1,1) + a(2,3)*a(2,4)", "--n", "4"]);
    assert!(output.status.success());
    assert_eq!(stdout(&output), "a(1,1)\n");
}

#[test]
fn reduce_collapse_folds_row_sums() {
    let output = run(&[
        "reduce",
        "a(1,1) + a(1,2) + a(1,3) + a(1,4)",
        "--n",
        "4",
        "--collapse",
    ]);
    assert!(output.status.success());
    assert_eq!(stdout(&output), "1\n");
}

#[test]
fn reduce_without_collapse_keeps_sums() {
    let output = run(&["reduce", "a(1,1) + a(1,2)", "--n", "2", "--collapse"]);
    assert_eq!(stdout(&output), "1\n");
    let output = run(&["reduce", "a(1,1) + a(1,2)", "--n", "2"]);
    assert_eq!(stdout(&output), "a(1,1) + a(1,2)\n");
}

#[test]
fn reduce_reports_parse_errors_with_position() {
    let output = run(&["reduce", "a(1 1)", "--n", "4"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stdout(&output).is_empty());
    let err = stderr(&output);
    assert!(err.contains("byte 4"), "{err}");
    assert!(err.lines().any(|line| line.trim() == "^"), "{err}");
}

#[test]
fn verify_wedge_scenario_passes() {
    let output = run(&[
        "verify",
        "--config",
        repo_scenario("wedge.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("overall: PASS"), "{text}");
    assert!(text.contains("[INFO] fixed_points"), "{text}");
}

#[test]
fn verify_bouquet_scenario_passes() {
    let output = run(&[
        "verify",
        "--config",
        repo_scenario("bouquet.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    assert!(stdout(&output).contains("overall: PASS"));
}

#[test]
fn verify_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let output = run(&[
        "verify",
        "--config",
        repo_scenario("wedge.json").to_str().unwrap(),
        "--json",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["overall"], "pass");
    assert_eq!(report["scenario"]["seed"], 42);
    assert!(report["timing_ms"].is_u64());
    let checks = report["checks"].as_array().unwrap();
    // coassoc expands to two reports: 10 requested checks, 11 reports.
    assert_eq!(checks.len(), 11);
    let density = checks.iter().find(|c| c["check"] == "density").unwrap();
    assert_eq!(density["metrics"]["rank"], 68);
}

#[test]
fn verify_missing_file_is_structural() {
    let output = run(&["verify", "--config", "/nonexistent/scenario.json"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("cannot read"));
}

#[test]
fn verify_rejects_unknown_fields() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{
            "unitary": {"permutation": [1, 2, 3, 4]},
            "space": {"kind": "interval", "m": 5, "glued_indices": [1], "n": 4},
            "tollerance": 1e-8
        }"#,
    )
    .unwrap();
    let output = run(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("invalid scenario"));
}

#[test]
fn verify_failing_check_exits_one() {
    // Structurally valid blocks that are nowhere near projections.
    let blocks: Vec<ComplexMatrix> = [0.6, 0.4, 0.4, 0.6]
        .iter()
        .map(|&v| ComplexMatrix::new(1, 1, vec![Complex64::new(v, 0.0)]).unwrap())
        .collect();
    let unitary = MagicUnitary::new(2, 1, blocks).unwrap();
    let scenario = serde_json::json!({
        "unitary": serde_json::to_value(&unitary).unwrap(),
        "space": {"kind": "interval", "m": 3, "glued_indices": [1], "n": 2},
        "checks": ["magic"]
    });
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, scenario.to_string()).unwrap();
    let output = run(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let text = stdout(&output);
    assert!(text.contains("[FAIL] magic_unitary"), "{text}");
    assert!(text.contains("overall: FAIL"), "{text}");
}

#[test]
fn qpg_seed_overrides_scenario_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let output = qpg()
        .args([
            "verify",
            "--config",
            repo_scenario("wedge.json").to_str().unwrap(),
            "--json",
            out_path.to_str().unwrap(),
        ])
        .env("QPG_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["scenario"]["seed"], 7);
    let invariance = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["check"] == "invariance")
        .unwrap();
    assert_eq!(invariance["seed"], 7);
}

#[test]
fn invalid_qpg_seed_is_structural() {
    let output = qpg()
        .args(["demo", "wedge"])
        .env("QPG_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("QPG_SEED"));
}

#[test]
fn demo_with_other_sizes_falls_back_to_permutation() {
    let output = run(&["demo", "wedge", "--n", "3"]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    assert!(stderr(&output).contains("cyclic permutation"));
    assert!(stdout(&output).contains("permutation [2, 3, 1]"));
}

#[test]
fn demo_reports_genuineness_witness() {
    let output = run(&["demo", "wedge"]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("[INFO] genuineness"), "{text}");
    assert!(text.contains("commutator_norm=0.5"), "{text}");
}

#[test]
fn demo_commutative_angle_has_no_witness() {
    let output = run(&["demo", "wedge", "--theta", "0"]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let text = stdout(&output);
    assert!(
        text.contains("all generator pairs commute at this threshold"),
        "{text}"
    );
}
