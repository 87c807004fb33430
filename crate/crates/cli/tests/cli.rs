use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tempfile::NamedTempFile;

const EXAMPLE2: &str = r#"{"p":3,"s":4,"n":3,
  "f":[{"coeffs":[1,0,1,1]},{"coeffs":[1,0,1,1]},{"coeffs":[0,1,0,0,0,0,0,0,0,0,0,1,0,1]}],
  "P":[{"terms":[{"c":1,"e":[1,0,0]},{"c":1,"e":[0,1,0]},{"c":1,"e":[0,0,1]}]}],
  "I":[1,2,3]}"#;

// x1^2 + ... + x5^2 = 0 over F_5
const WAN: &str = r#"{"p":5,"s":1,"n":5,
  "f":[{"coeffs":[0,0,1]},{"coeffs":[0,0,1]},{"coeffs":[0,0,1]},{"coeffs":[0,0,1]},{"coeffs":[0,0,1]}],
  "P":[{"terms":[{"c":1,"e":[1,0,0,0,0]},{"c":1,"e":[0,1,0,0,0]},{"c":1,"e":[0,0,1,0,0]},
                 {"c":1,"e":[0,0,0,1,0]},{"c":1,"e":[0,0,0,0,1]}]}]}"#;

fn cwak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cwak")).args(args).output().unwrap()
}

fn file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn guarantee<'a>(report: &'a Value, id: &str) -> &'a Value {
    report["guarantees"].as_array().unwrap().iter().find(|g| g["theorem_id"] == id).unwrap()
}

#[test]
fn analyze_coefficients() {
    let coeffs = "0,1,0,0,0,0,0,0,0,0,0,1,0,1";
    let v = json(&cwak(&["analyze", "--p", "3", "--s", "4", "--coeffs", coeffs]));
    let a = &v["polynomials"][0]["analysis"];
    assert_eq!(a["u"], 14);
    assert_eq!(v["field"]["modulus"], serde_json::json!([2, 1, 0, 0, 1]));
    assert!(v["polynomials"][0]["bound_checks"]["omega_at_most_u"].as_bool().unwrap());
}

#[test]
fn identity_is_a_permutation() {
    let v = json(&cwak(&["analyze", "--p", "7", "--coeffs", "0,1"]));
    assert_eq!(v["polynomials"][0]["analysis"]["classification"], "PERMUTATION");
    assert_eq!(v["polynomials"][0]["analysis"]["u"], 6);
}

#[test]
fn verify_example_two() {
    let f = file(EXAMPLE2);
    let v = json(&cwak(&["verify", f.path().to_str().unwrap()]));
    assert_eq!(v["count_result"]["count"], "6669");
    assert_eq!(v["count_result"]["ord_p"], 3);
    assert_eq!(guarantee(&v, "MAIN")["applicable"], true);
    assert_eq!(v["violations"], serde_json::json!([]));
}

#[test]
fn wan_exponent() {
    let f = file(WAN);
    let v = json(&cwak(&["verify", f.path().to_str().unwrap()]));
    assert_eq!(guarantee(&v, "WAN")["guaranteed_p_exponent"], 2);
    let count: u64 = v["count_result"]["count"].as_str().unwrap().parse().unwrap();
    assert_eq!(count % 25, 0);
}

#[test]
fn all_subsets_reports_best() {
    let f = file(EXAMPLE2);
    let v = json(&cwak(&["verify", f.path().to_str().unwrap(), "--all-subsets"]));
    assert!(v["best"]["guarantee"]["guaranteed_p_exponent"].as_u64().unwrap() >= 1);
    assert_eq!(v["violations"], serde_json::json!([]));
}

#[test]
fn stdin_input() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_cwak"))
        .args(["count", "-", "--method", "brute"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(WAN.as_bytes()).unwrap();
    let v = json(&child.wait_with_output().unwrap());
    assert_eq!(v["count_result"]["method"], "brute");
}

#[test]
fn malformed_json_exits_2() {
    let f = file("{\"p\": 3,");
    let out = cwak(&["count", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let f = file(&EXAMPLE2.replace("\"p\":3", "\"p\":6"));
    assert_eq!(cwak(&["count", f.path().to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn budget_overrun_exits_3() {
    let f = file(EXAMPLE2);
    let out = cwak(&["count", f.path().to_str().unwrap(), "--method", "brute", "--budget", "100"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reproductions_pass() {
    for which in [&["repro", "example2"][..], &["repro", "example1"], &["repro", "monomial-table", "--max-q", "32"]] {
        let v = json(&cwak(which));
        assert_eq!(v["status"], "PASS", "{which:?}");
    }
}

#[test]
fn seeded_commands_are_deterministic() {
    let search = ["search-sharpness", "--p", "3", "--n", "3", "--trials", "20", "--seed", "9", "--json"];
    assert_eq!(cwak(&search).stdout, cwak(&search).stdout);
    let lemmas = ["verify-lemmas", "--p", "2", "--s", "2", "--k", "3", "--trials", "20", "--seed", "4"];
    let a = cwak(&lemmas);
    assert_eq!(a.stdout, cwak(&lemmas).stdout);
    assert!(json(&a)["report"]["lift_lemma"]["passed"].as_u64().unwrap() == 20);
}

#[test]
fn compact_output() {
    let out = cwak(&["--json", "omega", "--p", "5", "--coeffs", "0,0,1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.trim().lines().count(), 1);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["polynomials"][0]["omega"], 2);
}
