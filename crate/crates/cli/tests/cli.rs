use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn program(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../programs").join(name);
    p.to_string_lossy().into_owned()
}

fn ldst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldst")).args(args).env_remove("LDST_FUEL").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn check_accepts_listings() {
    for name in ["listing4.ldgv", "listing1.lsst", "compute.ldgv"] {
        let o = ldst(&["check", &program(name)]);
        assert!(o.status.success(), "{name}: {}", stdout(&o));
    }
}

#[test]
fn check_rejects_negative_programs() {
    let o = ldst(&["--format", "structured", "check", &program("negative/wrong_label.ldgv")]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["command"], "check");
    assert_eq!(v["report"]["ok"], false);
}

#[test]
fn run_prints_main() {
    let o = ldst(&["run", &program("compute.ldgv")]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("main = -5"), "{}", stdout(&o));
}

#[test]
fn run_structured_output() {
    let o = ldst(&["--format", "structured", "run", "--trace", "--seed", "3", &program("compute_add.ldgv")]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["main"], "7");
    assert_eq!(v["outcome"]["status"], "all_finished");
    assert!(v["trace"].as_array().is_some_and(|t| !t.is_empty()));
    assert_eq!(v["steps"].as_u64(), Some(v["trace"].as_array().unwrap().len() as u64));
}

#[test]
fn deadlock_exits_nonzero() {
    let o = ldst(&["run", &program("corpus/deadlock.ldgv")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fuel_flag_overrides_environment() {
    let file = program("compute.ldgv");
    let starved = Command::new(env!("CARGO_BIN_EXE_ldst"))
        .args(["--format", "structured", "run", &file])
        .env("LDST_FUEL", "3")
        .output()
        .unwrap();
    assert_eq!(json(&starved)["outcome"]["status"], "out_of_fuel");
    let fed = Command::new(env!("CARGO_BIN_EXE_ldst"))
        .args(["--fuel", "100000", "run", &file])
        .env("LDST_FUEL", "3")
        .output()
        .unwrap();
    assert!(fed.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_ldst")).args(["run", &file]).env("LDST_FUEL", "lots").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn sub_reports_the_multiplicity() {
    let o = ldst(&["sub", "--left", "{Neg}", "--right", "{Neg, Add}"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("subtype at un"), "{}", stdout(&o));
    let o = ldst(&["--format", "structured", "sub", "--left", "!Int.End", "--right", "?Int.End"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["subtype"], false);
    assert_eq!(v["error"]["code"], "NotASubtype");
}

#[test]
fn dual_uses_type_abbreviations() {
    let o = ldst(&["--format", "structured", "dual", &program("nodes.ldgv"), "--type", "NodeC"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json(&o)["dual"].as_str().unwrap().starts_with("?(tag : {Empty, Node})"));
}

#[test]
fn translate_then_check() {
    let out = std::env::temp_dir().join(format!("ldst-translate-{}.ldgv", std::process::id()));
    let o = ldst(&["translate", &program("compute.lsst"), "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = ldst(&["check", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let o = ldst(&["run", out.to_str().unwrap()]);
    assert!(stdout(&o).contains("main = -5"));
    let _ = std::fs::remove_file(out);
}

#[test]
fn simulate_reports_agreement() {
    let o = ldst(&["--format", "structured", "simulate", &program("compute.lsst")]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["ok"], true);
    assert_eq!(v["lsst_value"], "-5");
    assert!(v["max_resync"].as_u64().unwrap() <= 8);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(ldst(&["check", "/nonexistent/file.ldgv"]).status.code(), Some(2));
    assert_eq!(ldst(&["dual", "--type", "!Int."]).status.code(), Some(2));
    let o = ldst(&["--format", "structured", "check", "/nonexistent/file.ldgv"]);
    assert_eq!(json(&o)["exit"], 2);
}
