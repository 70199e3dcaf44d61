use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SCHEMA: &str = include_str!("../schemas/islarr-output.v1.json");

struct Ws {
    dir: TempDir,
}

impl Ws {
    fn new() -> Self {
        Ws { dir: tempfile::tempdir().unwrap() }
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }
}

fn islarr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_islarr")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)));
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{v:#}");
    v
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn check_valid_triple() {
    let ws = Ws::new();
    let pre = ws.file("pre", "x |-> -");
    let prog = ws.file("prog", "free(x)");
    let post = ws.file("post", "x !|->");
    for method in ["semantic", "logical", "both"] {
        let out = islarr(&[
            "check", "--pre", p(&pre), "--prog", p(&prog), "--post", p(&post), "--method", method, "--format", "json",
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["status"], "valid");
    }
}

#[test]
fn check_invalid_triple_reports_a_witness() {
    let ws = Ws::new();
    let pre = ws.file("pre", "x |-> - * x |-> -");
    let prog = ws.file("prog", "free(x)");
    let post = ws.file("post", "emp * x |-> -");
    let out = islarr(&["check", "--pre", p(&pre), "--prog", p(&prog), "--post", p(&post), "--format", "json"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["status"], "invalid");
    assert!(v["witness"].is_object());
    let text = islarr(&["check", "--pre", p(&pre), "--prog", p(&prog), "--post", p(&post)]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("witness"));
}

#[test]
fn wpo_of_skip_and_alloc() {
    let ws = Ws::new();
    let pre = ws.file("pre", "emp");
    let skip = ws.file("skip", "skip");
    let out = islarr(&["wpo", "--pre", p(&pre), "--prog", p(&skip), "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["truncated"], false);
    let alloc = ws.file("alloc", "x := alloc(1)");
    let out = islarr(&["wpo", "--pre", p(&pre), "--prog", p(&alloc), "--exit", "er", "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["disjuncts"].as_array().unwrap().len(), 0);
}

#[test]
fn wpo_of_a_loop_is_truncated() {
    let ws = Ws::new();
    let pre = ws.file("pre", "emp * x == 0");
    let prog = ws.file("prog", "{ x := x + 1 }*");
    let out = islarr(&["wpo", "--pre", p(&pre), "--prog", p(&prog), "--loop-bound", "1", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["truncated"], true);
    assert!(v["truncation"].is_string());
}

#[test]
fn find_bugs_lists_error_disjuncts() {
    let ws = Ws::new();
    let pre = ws.file("pre", "arr(a, a + 2) * b(a) == a * e(a) == a + 2");
    let prog = ws.file("prog", "free(a + 1)");
    let out = islarr(&["find-bugs", "--pre", p(&pre), "--prog", p(&prog), "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(!v["er_disjuncts"].as_array().unwrap().is_empty());
    let safe = ws.file("safe", "skip");
    let out = islarr(&["find-bugs", "--pre", p(&pre), "--prog", p(&safe), "--format", "json"]);
    assert!(json(&out)["er_disjuncts"].as_array().unwrap().is_empty());
}

#[test]
fn oracle_diff_on_files() {
    let ws = Ws::new();
    let pre = ws.file("pre", "x |-> 1");
    let prog = ws.file("prog", "y := [x]; free(x)");
    let out = islarr(&["oracle-diff", "--pre", p(&pre), "--prog", p(&prog), "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["status"], "pass");
}

#[test]
fn seeded_corpus_is_reproducible() {
    let run = |jobs: &str| {
        let out = islarr(&["oracle-diff", "--count", "4", "--seed", "7", "--vmax", "3", "--jobs", jobs, "--format", "json"]);
        json(&out);
        (code(&out), out.stdout)
    };
    let a = run("1");
    assert_eq!(a, run("1"));
    assert_eq!(a, run("2"));
    assert_ne!(a.0, 3);
}

#[test]
fn check_rule_from_flags_and_instance_file() {
    let ws = Ws::new();
    let pre = ws.file("pre", "x |-> 1");
    let prog = ws.file("prog", "skip");
    let out = islarr(&["check-rule", "--rule", "Skip", "--pre", p(&pre), "--prog", p(&prog), "--post", p(&pre), "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["accepted"], true);

    let inst = ws.file(
        "inst.json",
        r#"{
            "rule": "Seq1",
            "premises": [{ "pre": "emp", "prog": "error()", "exit": "er", "post": "emp" }],
            "conclusion": { "pre": "emp", "prog": "error(); skip", "exit": "er", "post": "emp" }
        }"#,
    );
    let out = islarr(&["check-rule", "--instance", p(&inst), "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let bad = ws.file("post", "x |-> 2");
    let out = islarr(&["check-rule", "--rule", "Skip", "--pre", p(&pre), "--prog", p(&prog), "--post", p(&bad)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn errors_exit_with_code_three() {
    let ws = Ws::new();
    let pre = ws.file("pre", "x |-> 1");
    let prog = ws.file("prog", "skip");
    let out = islarr(&["check-rule", "--rule", "Bogus", "--pre", p(&pre), "--prog", p(&prog), "--post", p(&pre)]);
    assert_eq!(code(&out), 3);
    let broken = ws.file("broken", "x := 1;\n[x] := ");
    let out = islarr(&["wpo", "--pre", p(&pre), "--prog", p(&broken)]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("2:"), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&islarr(&["wpo", "--prog", p(&prog)])), 3);
    assert_eq!(code(&islarr(&["frobnicate"])), 3);
}

#[test]
fn config_file_supplies_defaults() {
    let ws = Ws::new();
    ws.file("pre", "emp * x == 0");
    ws.file("prog", "{ x := x + 1 }*");
    let cfg = ws.file("run.json", r#"{ "pre": "pre", "prog": "prog", "loop_bound": 1, "format": "json" }"#);
    let out = islarr(&["wpo", "--config", p(&cfg)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let one = json(&out)["disjuncts"].as_array().unwrap().len();
    let out = islarr(&["wpo", "--config", p(&cfg), "--loop-bound", "2"]);
    assert!(json(&out)["disjuncts"].as_array().unwrap().len() > one);
    let bad = ws.file("bad.json", r#"{ "nonsense": 1 }"#);
    assert_eq!(code(&islarr(&["wpo", "--config", p(&bad)])), 3);
}
