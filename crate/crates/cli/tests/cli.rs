//! End-to-end runs of the `elicit` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

const FEASIBILITY: &str = r#"{
    "M": 3, "N": 2, "L": 1,
    "C": [["-1", "-1", "1"]],
    "alpha": [["1", "0", "2"], ["0", "1", "2"]],
    "aggregation": {
        "inputs": [["1", "0", "1"], ["0", "1", "1"]],
        "aggregate": ["0", "0", "1"],
        "rule": "intersection"
    }
}"#;

const SUPPORT: &str = r#"{
    "M": 3, "N": 2, "L": 0,
    "C": [],
    "alpha": [["1", "0", "3/5"], ["0", "1", "3/5"]],
    "aggregation": {
        "inputs": [["1", "0", "0"], ["0", "1", "0"]],
        "aggregate": ["1/2", "1/2", "0"],
        "rule": "addition",
        "weights": ["1/2", "1/2"]
    }
}"#;

const BINDING_COUNTEREXAMPLE: &str = r#"{
    "M": 2, "N": 1, "L": 2,
    "C": [["1", "-1"], ["-2", "1"]],
    "alpha": [["1", "1"]],
    "aggregation": {
        "inputs": [["1", "1"], ["1", "2"]],
        "aggregate": ["5", "7"]
    }
}"#;

fn write(name: &str, text: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elicit")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn validate_accepts_a_well_formed_instance() {
    let p = write("validate.json", FEASIBILITY);
    assert_eq!(code(&run(&["validate", p.to_str().unwrap()])), 0);
}

#[test]
fn elicit_exit_codes_follow_the_verdict() {
    let p = write("elicit-feasibility.json", FEASIBILITY);
    let p = p.to_str().unwrap();
    assert_eq!(code(&run(&["elicit", p, "1,0,1"])), 0);
    assert_eq!(code(&run(&["elicit", p, "0,0,1"])), 2);
    let s = write("elicit-support.json", SUPPORT);
    let out = run(&["elicit", s.to_str().unwrap(), "1/2,1/2,0"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("-3"), "{}", stdout(&out));
}

#[test]
fn parse_and_domain_errors_have_distinct_codes() {
    let bad = write("bad-rational.json", &FEASIBILITY.replace(r#"["1", "0", "2"]"#, r#"["1/0", "0", "2"]"#));
    assert_eq!(code(&run(&["validate", bad.to_str().unwrap()])), 3);
    let zero = write("zero-row.json", &FEASIBILITY.replace(r#"["1", "0", "2"]"#, r#"["0", "0", "0"]"#));
    let out = run(&["validate", zero.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("feature map assumption"));
    let p = write("vector-parse.json", FEASIBILITY);
    assert_eq!(code(&run(&["elicit", p.to_str().unwrap(), "1,x,1"])), 3);
}

#[test]
fn expansion_modes() {
    let s = write("expand-support.json", SUPPORT);
    assert_eq!(code(&run(&["expand", s.to_str().unwrap(), "--fixed-alpha"])), 0);
    let b = write("expand-binding.json", BINDING_COUNTEREXAMPLE);
    assert_eq!(code(&run(&["expand", b.to_str().unwrap(), "--existential"])), 1);
    let f = write("expand-feasibility.json", FEASIBILITY);
    let out = run(&["--json", "expand", f.to_str().unwrap(), "--existential"]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["certificates"]["alpha_witness"], serde_json::json!([["1", "1", "1"]]));
}

#[test]
fn construct_alpha_rejects_non_reducing_directions() {
    let out = run(&["--json", "construct-alpha", "1,-2"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("\"2\""));
    assert_eq!(code(&run(&["construct-alpha", "-1,-1"])), 2);
}

#[test]
fn reports_verify_and_tampering_is_caught() {
    let f = write("verify-feasibility.json", FEASIBILITY);
    let out = run(&["--json", "expand", f.to_str().unwrap(), "--existential"]);
    let text = stdout(&out);
    let good = write("report-good.json", &text);
    assert_eq!(code(&run(&["verify", good.to_str().unwrap()])), 0);

    let mut report: serde_json::Value = serde_json::from_str(&text).unwrap();
    report["certificates"]["alpha_witness"] = serde_json::json!([["1", "0", "0"]]);
    let verdicts = report["certificates"]["verdicts"].as_array_mut().unwrap();
    for v in verdicts.iter_mut() {
        v["alpha"] = serde_json::json!([["1", "0", "0"]]);
    }
    let tampered = write("report-tampered.json", &report.to_string());
    assert_ne!(code(&run(&["verify", tampered.to_str().unwrap()])), 0);
}

#[test]
fn mechanism_reports_verify() {
    let b = write("mechanisms-binding.json", BINDING_COUNTEREXAMPLE);
    let out = run(&["--json", "mechanisms", b.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let mut report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["mechanisms"]["binding_contraction"], serde_json::json!([true, true]));
    let good = write("mechanisms-good.json", &report.to_string());
    assert_eq!(code(&run(&["verify", good.to_str().unwrap()])), 0);
    report["mechanisms"]["feasibility_expansion"] = serde_json::json!(true);
    let bad = write("mechanisms-bad.json", &report.to_string());
    assert_ne!(code(&run(&["verify", bad.to_str().unwrap()])), 0);
}

#[test]
fn reference_examples_pass() {
    let out = run(&["paper-examples"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));
}

#[test]
fn quiet_mode_prints_nothing() {
    let p = write("quiet.json", FEASIBILITY);
    let out = run(&["--quiet", "elicit", p.to_str().unwrap(), "0,0,1"]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
}

#[test]
fn oracle_on_a_file_is_clean() {
    let p = write("oracle.json", SUPPORT);
    assert_eq!(code(&run(&["--trials", "3", "oracle", p.to_str().unwrap()])), 0);
}
