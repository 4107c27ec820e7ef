//! End-to-end tests of the `gh` binary: exit codes, report schema,
//! determinism across thread counts, and the uncertified cap path.

use assert_cmd::Command;
use predicates::prelude::*;
use serde_json::Value;

fn gh() -> Command {
    Command::cargo_bin("gh").unwrap()
}

fn stdout_json(args: &[&str]) -> Value {
    let out = gh().args(args).assert().success().get_output().stdout.clone();
    serde_json::from_slice(&out).unwrap()
}

#[test]
fn exact_on_generators_reports_the_point_law() {
    let v = stdout_json(&["exact", "simplex:2", "simplex:3", "--json"]);
    assert_eq!(v["result"]["dgh"], 0.5);
    assert_eq!(v["result"]["two_dgh"], 1.0);
    assert_eq!(v["result"]["method"], "subset-enum");
    assert!(v["result"]["witness"].is_object());
    assert!(v["result"]["enumerated"].as_u64().unwrap() > 0);
    assert_eq!(v["command"], "exact");
    assert_eq!(v["inputs"].as_array().unwrap().len(), 2);
    for input in v["inputs"].as_array().unwrap() {
        assert_eq!(input["sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn missing_files_exit_2() {
    gh().args(["exact", "no-such-file.json", "simplex:2"])
        .assert()
        .code(2)
        .stderr(predicate::str::contains("file not found: no-such-file.json"));
}

#[test]
fn malformed_json_reports_path_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"dist\": [[0.0,\n}").unwrap();
    gh().args(["space", "validate", path.to_str().unwrap()])
        .assert()
        .code(2)
        .stderr(predicate::str::contains("parse error in"))
        .stderr(predicate::str::contains("bad.json"))
        .stderr(predicate::str::contains("line 3"));
}

#[test]
fn invalid_matrices_name_the_violation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("asym.json");
    std::fs::write(
        &path,
        r#"{"dist": [[0.0, 1.0], [0.5, 0.0]]}"#,
    )
    .unwrap();
    gh().args(["space", "validate", path.to_str().unwrap()])
        .assert()
        .code(2)
        .stderr(predicate::str::contains("asymmetric"));
}

#[test]
fn bad_flag_values_exit_2() {
    gh().args(["exact", "simplex:2", "simplex:2", "--strategy", "magic"])
        .assert()
        .code(2)
        .stderr(predicate::str::contains("--strategy"));
    gh().args(["linear", "--a", "1", "--b", "2", "--p", "0.5"])
        .assert()
        .code(2)
        .stderr(predicate::str::contains("--p"));
    gh().args(["linear", "--a", "1,oops", "--b", "2", "--p", "2"])
        .assert()
        .code(2)
        .stderr(predicate::str::contains("--a"));
    gh().args(["tori", "--x", "1,2,3", "--y", "1,2"])
        .assert()
        .code(2)
        .stderr(predicate::str::contains("exactly two radii"));
    // A generator with a bad size names the constraint, not a missing file.
    gh().args(["self-product", "cycle:5", "-k", "4"])
        .assert()
        .code(2)
        .stderr(predicate::str::contains("cycle size must be even"));
}

#[test]
fn linear_reports_attainability() {
    let v = stdout_json(&["linear", "--a", "1,3", "--b", "2,5", "--p", "2", "--json"]);
    let r = &v["result"];
    assert_eq!(r["attainable"], true);
    let expected = 29f64.sqrt() - 10f64.sqrt();
    let got = r["two_dgh_exact"].as_f64().unwrap();
    assert!((got - expected).abs() <= 1e-12);
    assert_eq!(r["subset_sup"]["witness_subset"], serde_json::json!([0, 1]));
}

#[test]
fn reports_are_byte_identical_across_thread_counts() {
    for args in [
        vec!["exact", "simplex:3", "cycle:6", "--json"],
        vec!["verify-lemmas", "--draws", "20", "--grid", "301", "--json"],
        vec!["linear", "--a", "1,2,3,4,5,6,7,8,9", "--b", "9,8,7,6,5,4,3,2,1", "--p", "2", "--json"],
    ] {
        let run = |threads: &str| {
            gh().args(&args)
                .env("GH_THREADS", threads)
                .assert()
                .success()
                .get_output()
                .stdout
                .clone()
        };
        let one = run("1");
        let four = run("4");
        assert_eq!(one, four, "args: {args:?}");
    }
}

#[test]
fn report_flag_writes_the_same_json_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = gh()
        .args(["exact", "simplex:2", "simplex:4", "--json", "--report"])
        .arg(&path)
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let written = std::fs::read(&path).unwrap();
    assert_eq!(out, written);

    // Human mode still writes the full JSON report to the file.
    let path2 = dir.path().join("report2.json");
    gh().args(["exact", "simplex:2", "simplex:4", "--report"])
        .arg(&path2)
        .assert()
        .success();
    assert_eq!(std::fs::read(&path2).unwrap(), written);
}

#[test]
fn cap_exhaustion_exits_3_with_uncertified_report() {
    let out = gh()
        .args([
            "clique-bound",
            "simplex:3",
            "cycle:12",
            "--cap-clique-nodes",
            "2",
            "--json",
        ])
        .assert()
        .code(3)
        .get_output()
        .stdout
        .clone();
    let v: Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(v["uncertified"], true);
    assert!(v["error"].as_str().unwrap().contains("cap"));

    gh().args(["exact", "simplex:5", "simplex:6", "--cap-bits", "4", "--cap-states", "10"])
        .assert()
        .code(3)
        .stdout(predicate::str::contains("UNCERTIFIED"));
}

#[test]
fn generated_spaces_round_trip_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c8.json");
    gh().args(["space", "gen", "cycle:8", "-o"])
        .arg(&path)
        .assert()
        .success();
    let file: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(file["dist"].as_array().unwrap().len(), 8);

    let v = stdout_json(&["space", "validate", path.to_str().unwrap(), "--json"]);
    assert_eq!(v["result"]["valid"], true);
    assert_eq!(v["result"]["points"], 8);
    assert_eq!(v["result"]["diameter"], 1.0);
}

#[test]
fn product_build_then_exact_matches_the_self_product_law() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let product = dir.path().join("square.json");
    std::fs::write(
        &spec,
        r#"{"p": "inf", "factors": [{"space": "simplex:2"}, {"space": "simplex:2"}]}"#,
    )
    .unwrap();
    gh().args(["product", "build", spec.to_str().unwrap(), "-o"])
        .arg(&product)
        .assert()
        .success();

    // d_GH(X, X x_inf X) = diam(X) / 2 once 2^k exceeds #X.
    let v = stdout_json(&["exact", "simplex:2", product.to_str().unwrap(), "--json"]);
    assert_eq!(v["result"]["dgh"], 0.5);
}

#[test]
fn bounds_accepts_supplied_distances() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.json");
    std::fs::write(
        &pairs,
        r#"{"pairs": [{"x": "simplex:2", "y": "simplex:3"}, {"x": "cycle:4", "y": "point"}],
            "dgh": [0.5, 0.5]}"#,
    )
    .unwrap();
    let v = stdout_json(&["bounds", "--pairs", pairs.to_str().unwrap(), "--p", "inf", "--json"]);
    let r = &v["result"];
    assert_eq!(r["supplied"], true);
    assert_eq!(r["per_factor_dgh"], serde_json::json!([0.5, 0.5]));
    // l^inf norm of (0.5, 0.5).
    assert_eq!(r["bounds"]["upper"], 0.5);
    let lower = r["bounds"]["lower"].as_f64().unwrap();
    let upper = r["bounds"]["upper"].as_f64().unwrap();
    assert!(lower <= upper);
}

#[test]
fn verify_lemmas_reports_zero_failures() {
    let v = stdout_json(&["verify-lemmas", "--draws", "25", "--grid", "401", "--seed", "7", "--json"]);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["result"]["endpoint_failures"], 0);
    assert_eq!(v["result"]["corner_failures"], 0);
    assert_eq!(v["result"]["draws"], 25);
}

#[test]
fn timings_are_opt_in() {
    let v = stdout_json(&["exact", "simplex:2", "simplex:3", "--json"]);
    assert!(v.get("timing_ms").is_none());
    let v = stdout_json(&["exact", "simplex:2", "simplex:3", "--json", "--timings"]);
    assert!(v["timing_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn tori_human_output_is_parseable() {
    let out = gh()
        .args(["tori", "--x", "1,3", "--y", "2,5", "--resolution", "8"])
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("linear.attainable = true"));
    assert!(text.contains("discretization_gap = 0.0"));
}
