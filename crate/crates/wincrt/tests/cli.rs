//! End-to-end checks of the command-line interface: golden outputs on the
//! shipped example data, exit codes, and the records format.

use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wincrt"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn analyze_reproduces_worked_example() {
    let path = data("table1_trial.csv");
    let out = run(&[
        "analyze",
        path.to_str().unwrap(),
        "--scheme",
        "cluster-pair",
        "--levels",
        "C,B,A",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("-0.0419"), "WD missing from:\n{text}");

    let out = run(&[
        "analyze",
        path.to_str().unwrap(),
        "--scheme",
        "individual-pair",
        "--levels",
        "C,B,A",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.2592"), "WD missing from:\n{text}");
}

#[test]
fn estimand_prints_exact_fractions() {
    let path = data("table_s1_spec.toml");
    let out = run(&["estimand", path.to_str().unwrap(), "--rational"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // 29509/61504 is 737725/1537600 in lowest terms.
    assert!(
        text.contains("29509/61504"),
        "fraction missing from:\n{text}"
    );
}

#[test]
fn records_format_is_json_lines() {
    let path = data("table1_trial.csv");
    let out = run(&[
        "analyze",
        path.to_str().unwrap(),
        "--levels",
        "C,B,A",
        "--format",
        "records",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<serde_json::Value> = text
        .lines()
        .map(|line| serde_json::from_str(line).expect("valid json line"))
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["estimand"], "WR");
    assert!(rows[0]["ci_lower"].as_f64().unwrap() <= rows[0]["estimate"].as_f64().unwrap());
}

#[test]
fn parse_errors_exit_2_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "cluster_id,arm,outcome\na,1,A\nb,2,B\nc,0,A\n").unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "stderr:\n{err}");
}

#[test]
fn validation_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.toml");
    std::fs::write(
        &path,
        "levels = [\"C\", \"A\"]\n[[cluster_type]]\nprobability = 0.5\nsize = 10\ntreated = [1, 1]\ncontrol = [1, 1]\n",
    )
    .unwrap();
    let out = run(&["estimand", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn degenerate_inference_exits_4() {
    // Two clusters: jackknife deletion would empty an arm.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.csv");
    std::fs::write(
        &path,
        "cluster_id,arm,outcome\nt,1,A\nt,1,B\nc,0,A\nc2,0,B\n",
    )
    .unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn truth_records_embed_metadata() {
    let path = data("no_ics.toml");
    let out = run(&["truth", path.to_str().unwrap(), "--format", "records"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<serde_json::Value> = text
        .lines()
        .map(|line| serde_json::from_str(line).unwrap())
        .collect();
    assert_eq!(rows.len(), 6);
    for row in &rows {
        assert_eq!(row["gamma_link"], "mean-scaled");
        assert_eq!(row["config_hash"].as_str().unwrap().len(), 64);
    }
    let wr = rows
        .iter()
        .find(|r| r["level"] == "individual" && r["estimand"] == "WR")
        .unwrap();
    assert!((wr["value"].as_f64().unwrap() - 3.86).abs() < 0.02);
}
