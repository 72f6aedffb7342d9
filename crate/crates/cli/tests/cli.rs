use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value as Json;

fn programs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/programs")
}

fn program(name: &str) -> String {
    programs().join(name).to_string_lossy().into_owned()
}

fn oblivlog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oblivlog")).args(args).env_remove("OBLIVLOG_FUEL").output().expect("binary runs")
}

fn json(out: &Output) -> Json {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn golden(name: &str, out: &Output) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    let want = std::fs::read_to_string(&path).unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout), want, "{}", path.display());
}

#[test]
fn run_skip_emits_initial_distribution() {
    let out = oblivlog(&["run", "--program", &program("skip.obl")]);
    assert_eq!(out.status.code(), Some(0));
    golden("run_skip.json", &out);
}

#[test]
fn run_golden_documents() {
    golden("run_coin.json", &oblivlog(&["run", "--program", &program("coin.obl")]));
    let out = oblivlog(&["secrecy", "--program", &program("leaky.obl"), "--secret-var", "s", "--secrets", "[0, 1]"]);
    assert_eq!(out.status.code(), Some(1));
    golden("secrecy_leaky.json", &out);
}

#[test]
fn run_with_inputs_and_projection() {
    let out = oblivlog(&["run", "--program", &program("masked.obl"), "--set", "s=2", "--project", "Trace"]);
    let doc = json(&out);
    assert_eq!(doc["random"]["vars"], serde_json::json!(["Trace"]));
    assert_eq!(doc["random"]["rows"].as_array().unwrap().len(), 4);
    assert_eq!(oblivlog(&["run", "--program", &program("masked.obl"), "--project", "nope"]).status.code(), Some(2));
}

#[test]
fn synthetic_secrecy_is_perfect() {
    let out = oblivlog(&["secrecy", "--program", &program("synthetic.obl"), "--secret-var", "S", "--secrets", "[[0, 0], [0, 1], [1, 0], [1, 1]]", "--observe", "O"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["verdict"], "perfectly_oblivious");
    for row in doc["sd"].as_array().unwrap() {
        for p in row.as_array().unwrap() {
            assert_eq!(p["num"], 0);
        }
    }
    for d in doc["distributions"].as_array().unwrap() {
        assert_eq!(d["support"], 64);
    }
}

#[test]
fn epsilon_bound() {
    let args = ["secrecy", "--program", &program("leaky.obl"), "--secret-var", "s", "--secrets", "[0, 1]"];
    assert_eq!(oblivlog(&[&args[..], &["--epsilon", "1/4"]].concat()).status.code(), Some(0));
    assert_eq!(oblivlog(&[&args[..], &["--epsilon", "1/5"]].concat()).status.code(), Some(1));
    assert_eq!(oblivlog(&[&args[..], &["--epsilon", "x"]].concat()).status.code(), Some(2));
}

#[test]
fn non_atomic_assignment_is_invalid() {
    let out = oblivlog(&[
        "check-triple",
        "--pre",
        "C[0 = 0] * C[0 = 0]",
        "--program",
        &program("non_atomic.obl"),
        "--post",
        "D[x] * D[x]",
        "--universe",
        "x:rand={0,1}; denom=2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["verdict"], "invalid");
}

#[test]
fn assertions() {
    let ok = oblivlog(&["check-assert", "--program", &program("coin.obl"), "--assert", "U[{0, 1}, x] * U[{0, 1}, y]"]);
    assert_eq!(ok.status.code(), Some(0));
    let dependent = oblivlog(&["check-assert", "--program", &program("coin.obl"), "--assert", "C[x = y]"]);
    assert_eq!(dependent.status.code(), Some(1));
    assert!(json(&dependent)["counterexample"].is_object());
    let ent = oblivlog(&["check-assert", "--assert", "D[x]", "--implies", "U[{0, 1}, x]", "--universe", "x:rand={0,1}; denom=2"]);
    assert_eq!(ent.status.code(), Some(1));
    assert_eq!(oblivlog(&["check-assert", "--assert", "D[x]", "--implies", "D[x]"]).status.code(), Some(2));
}

#[test]
fn proof_scripts() {
    let good = oblivlog(&["check-proof", "--script", &program("mod8.proof.json")]);
    assert_eq!(good.status.code(), Some(0));
    assert_eq!(json(&good)["accepted"], true);
    let bad = oblivlog(&["check-proof", "--script", &program("mod8_uneven.proof.json")]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn limits_and_usage() {
    assert_eq!(oblivlog(&["--fuel", "3", "run", "--program", &program("synthetic.obl")]).status.code(), Some(3));
    let env = Command::new(env!("CARGO_BIN_EXE_oblivlog")).args(["run", "--program", &program("synthetic.obl")]).env("OBLIVLOG_FUEL", "3").output().unwrap();
    assert_eq!(env.status.code(), Some(3));
    let budget = oblivlog(&["check-assert", "--assert", "D[x]", "--implies", "U[{0, 1}, x]", "--universe", "x:rand={0,1,2}; denom=6", "--budget", "2"]);
    assert_eq!(budget.status.code(), Some(3));
    assert_eq!(oblivlog(&["run", "--program", "/nonexistent.obl"]).status.code(), Some(2));
    assert_eq!(oblivlog(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(oblivlog(&["case-study", "quicksort"]).status.code(), Some(2));
    assert_eq!(oblivlog(&["case-study", "sampling", "--param", "n=3"]).status.code(), Some(2));
}

#[test]
fn case_study_checks() {
    let out = oblivlog(&["case-study", "sampling", "--check-paper-assertions"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["passed"], true);
    let src = oblivlog(&["case-study", "path-oram", "--emit-source", "--param", "ops=r:0"]);
    assert!(String::from_utf8_lossy(&src.stdout).contains("ReadBucket"));
    let run = json(&oblivlog(&["case-study", "path-oram", "--param", "ops=r:0"]));
    assert_eq!(run["distribution"]["support"], 4);
}

#[test]
fn fuzzing_is_seeded() {
    let a = oblivlog(&["fuzz", "--rule", "Skip", "--instances", "3", "--seed", "11"]);
    let b = oblivlog(&["fuzz", "--rule", "Skip", "--instances", "3", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stderr).contains("seed 11"));
    assert_eq!(oblivlog(&["fuzz", "--rule", "Nope"]).status.code(), Some(2));
}
