use std::process::{Command, Output};

use serde_json::Value;

fn isingbell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isingbell"))
        .args(args)
        .env_remove("ISINGBELL_MAX_NODES")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Value of `column` in the first data row of CSV output.
fn csv_field(text: &str, column: &str) -> String {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().unwrap().clone();
    let at = header.iter().position(|h| h == column).unwrap_or_else(|| panic!("no column {column}"));
    reader.records().next().unwrap().unwrap()[at].to_string()
}

#[test]
fn eval_chsh_on_the_canonical_ladder() {
    let out = isingbell(&["eval", "--spec", "builtin:canonical-ladder", "--report", "chsh"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(csv_field(&stdout(&out), "x_bi"), "-0.667213");
}

#[test]
fn full_precision_matches_the_library() {
    let out = isingbell(&["eval", "--spec", "builtin:canonical-ladder", "--precision", "full"]);
    let printed: f64 = csv_field(&stdout(&out), "x_bi").parse().unwrap();
    let model = isingbell_core::build_model(isingbell_core::builtin::canonical_ladder(1.0, 1.0)).unwrap();
    assert_eq!(printed, isingbell_core::model_chsh(&model).unwrap().x_bi);
}

#[test]
fn independence_report_with_explicit_lambda() {
    let out = isingbell(&[
        "eval",
        "--spec",
        "builtin:canonical-ladder",
        "--report",
        "independence",
        "--lambda",
        "3,4,5,6,7,8",
        "--format",
        "json",
        "--precision",
        "full",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let cli: Value = serde_json::from_slice(&out.stdout).unwrap();
    let model = isingbell_core::build_model(isingbell_core::builtin::canonical_ladder(1.0, 1.0)).unwrap();
    let subset = isingbell_core::HiddenSubset::parse(&model, "3,4,5,6,7,8").unwrap();
    let lib = isingbell_core::independence::independence_report(&model, &subset).unwrap();
    let row = &cli[0];
    assert_eq!(row["md"].as_f64().unwrap(), lib.md);
    assert_eq!(row["od"].as_f64().unwrap(), lib.od);
    assert_eq!(row["pd"].as_f64().unwrap(), lib.pd);
}

#[test]
fn table_report_has_sixteen_cells() {
    let out = isingbell(&["eval", "--spec", "builtin:footnote23", "--report", "table"]);
    assert_eq!(stdout(&out).lines().count(), 17);
}

#[test]
fn malformed_spec_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "beta = 1\nnodes = [ { id = \"1\", role = \"outcome1\" }\n").unwrap();
    let out = isingbell(&["eval", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn unknown_lambda_id_exits_2() {
    let out = isingbell(&["eval", "--spec", "builtin:canonical-ladder", "--report", "independence", "--lambda", "9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_measure_setting_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("frozen.toml");
    // Huge analyzer fields push the (-,-) setting below the zero-measure threshold.
    let text = r#"
        beta = 1.0
        nodes = [
          { id = "1", role = "outcome1" },
          { id = "2", role = "outcome2" },
          { id = "a", role = "analyzer_a", h = 400.0 },
          { id = "b", role = "analyzer_b", h = 400.0 },
          { id = "3", role = "hidden" },
        ]
        edges = [ { a = "1", b = "a", j = 1.0 }, { a = "2", b = "b", j = 1.0 }, { a = "1", b = "3", j = 1.0 } ]
    "#;
    std::fs::write(&path, text).unwrap();
    let out = isingbell(&["eval", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn enumeration_cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_isingbell"))
        .args(["eval", "--spec", "builtin:canonical-ladder"])
        .env("ISINGBELL_MAX_NODES", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn chain_check_is_within_tolerance() {
    let out = isingbell(&["chain", "--n", "10", "--k", "0.5", "--check", "--precision", "full"]);
    assert_eq!(out.status.code(), Some(0));
    let deviation: f64 = csv_field(&stdout(&out), "max_rel_dev").parse().unwrap();
    assert!(deviation <= 1e-9);
}

#[test]
fn freewill_on_a_builtin() {
    let out = isingbell(&["freewill", "--spec", "builtin:footnote23", "--precision", "full"]);
    assert_eq!(out.status.code(), Some(0));
    let discrepancy: f64 = csv_field(&stdout(&out), "max_discrepancy").parse().unwrap();
    assert!(discrepancy <= 1e-12);
}

#[test]
fn sampling_is_byte_identical_per_seed() {
    let args = ["sample", "--spec", "builtin:canonical-ladder", "--seed", "42", "--n", "20000"];
    let first = isingbell(&args);
    let second = isingbell(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let other = isingbell(&["sample", "--spec", "builtin:canonical-ladder", "--seed", "43", "--n", "20000"]);
    assert_ne!(first.stdout, other.stdout);
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.csv");
    let out = isingbell(&["series", "--k", "0.3", "--chain-n", "6", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("formula,k,n,cases,max_rel_dev"));
}

#[test]
fn reproduce_passing_case_exits_0() {
    let out = isingbell(&["reproduce", "ch3-footnote23"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.matches(",PASS,").count(), 2);
}

#[test]
fn reproduce_contingent_rows_do_not_fail() {
    let out = isingbell(&["reproduce", "ch2-maxima"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("CONTINGENT"));
}

#[test]
fn reproduce_all_reports_the_homogeneous_miss() {
    let out = isingbell(&["reproduce", "all"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stdout(&out).contains("ch3-homogeneous,\"P(+,+|+,+)\",0.95 ± 5e-3,0.956326,FAIL"));
}

#[test]
fn optimize_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("search.toml");
    std::fs::write(
        &config,
        "lattice = \"builtin:footnote23\"\nbudget = 60\nseed = 5\nrestarts = 2\nladder_symmetric = true\n",
    )
    .unwrap();
    let summary = dir.path().join("summary.json");
    let args = ["optimize", config.to_str().unwrap(), "--summary", summary.to_str().unwrap()];
    let first = isingbell(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, isingbell(&args).stdout);
    let result: Value = serde_json::from_str(&std::fs::read_to_string(summary).unwrap()).unwrap();
    assert!(result["best_value"].as_f64().unwrap() >= 2.87);
}

#[test]
fn grid_scan_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("grid.toml");
    let text = r#"
        lattice = "builtin:canonical-ladder"
        [[parameter]]
        name = "J"
        targets = [{ j = ["1", "a"] }, { j = ["2", "b"] }]
        lower = 0.5
        upper = 1.5
    "#;
    std::fs::write(&config, text).unwrap();
    let out = isingbell(&["optimize", config.to_str().unwrap(), "--grid", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("J,x_bi,md,od,pd,error"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn decoupling_reaches_zero() {
    let out = isingbell(&["decouple", "--spec", "builtin:canonical-ladder", "--scales", "1,0"]);
    let text = stdout(&out);
    assert_eq!(text.lines().last().unwrap(), "0,0");
}
