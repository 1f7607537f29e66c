//! The `aara-fx` binary end to end: exit codes, diagnostics, reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn program(name: &str) -> String {
    corpus().join(format!("{name}.fx")).display().to_string()
}

fn aara(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aara-fx"))
        .args(args)
        .env_remove("AARA_FX_STEP_LIMIT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Drops `time_ms`/`mean_ms` fields, the only nondeterministic output.
fn without_timings(json: &str) -> String {
    json.lines().filter(|l| !l.contains("_ms\"")).collect::<Vec<_>>().join("\n")
}

#[test]
fn analyze_reports_the_bound() {
    let o = aara(&["analyze", &program("store_lists"), "store_lists"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("store_lists: bounded"));
    assert!(out.contains("signature: L^2(L^1(int)) ->[1;0] unit"));
    assert!(out.contains("bound: 1 + 2*|vs| + sum|vs[i]|"));
}

#[test]
fn analyze_unsolvable_exits_2() {
    let o = aara(&["analyze", &program("store_lists_q_naive"), "--json"]);
    assert_eq!(code(&o), 2);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let f = v["functions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|f| f["name"] == "store_lists_q_naive")
        .unwrap();
    assert_eq!(f["status"], "unsolvable");
    assert!(f["bound"].is_null());
}

#[test]
fn syntax_errors_exit_1_with_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.fx");
    fs::write(&f, "fun f (x: int): int =\n  let y = in x;\n").unwrap();
    let o = aara(&["analyze", f.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("bad.fx:2:11: syntax error"), "{}", stderr(&o));
}

#[test]
fn missing_files_and_bad_usage_exit_1() {
    assert_eq!(code(&aara(&["analyze", "/nonexistent.fx"])), 1);
    assert_eq!(code(&aara(&["frobnicate"])), 1);
    assert_eq!(code(&aara(&["--help"])), 0);
}

#[test]
fn analyze_json_is_deterministic_apart_from_timings() {
    let args = ["analyze", &program("zip"), "--json", "--tick-calls"];
    let a = stdout(&aara(&args));
    let b = stdout(&aara(&args));
    assert_eq!(without_timings(&a), without_timings(&b));
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["metric"]["tick_calls"], true);
    let zip = &v["functions"][0];
    assert_eq!(zip["name"], "zip");
    assert!(zip["lp"]["vars"].as_u64().unwrap() > 0);
    assert!(zip["bound"]["terms"].as_array().is_some());
}

#[test]
fn run_with_budgets() {
    let p = program("store_lists");
    let input = "[[1],[2,3]]";
    let prof = aara(&["run", &p, "store_lists", "--input", input, "--profile"]);
    assert_eq!(code(&prof), 0);
    assert!(stdout(&prof).contains("high-water mark: 8"));
    assert_eq!(code(&aara(&["run", &p, "store_lists", "--input", input, "--budget", "8"])), 0);
    let short = aara(&["run", &p, "store_lists", "--input", input, "--budget", "7"]);
    assert_eq!(code(&short), 3);
    assert!(stdout(&short).contains("resources exhausted"));
    assert_eq!(code(&aara(&["run", &p, "store_lists", "--input", input, "--budget", "15/2"])), 3);
}

#[test]
fn run_rejects_ill_typed_inputs() {
    let o = aara(&["run", &program("store_lists"), "store_lists", "--input", "(1, 2)"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("input"));
}

#[test]
fn run_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("trace.csv");
    let o = aara(&[
        "run",
        &program("simple_IO"),
        "simple_IO",
        "--trace",
        t.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(&t).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("step#,rule-name,resource,stack-depth"));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.split(',').count() == 4));
}

#[test]
fn step_limit_flag_and_environment() {
    let p = program("store_lists");
    let o = aara(&["run", &p, "store_lists", "--input", "[[1],[2,3]]", "--step-limit", "10"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("step limit of 10"));
    let o = Command::new(env!("CARGO_BIN_EXE_aara-fx"))
        .args(["run", &p, "store_lists", "--input", "[[1],[2,3]]"])
        .env("AARA_FX_STEP_LIMIT", "12")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("step limit of 12"));
}

#[test]
fn unchecked_run_of_a_reused_continuation_gets_stuck() {
    let p = program("one_shot_negative");
    let checked = aara(&["run", &p, "both"]);
    assert_eq!(code(&checked), 1);
    assert!(stderr(&checked).contains("used more than once"));
    let o = aara(&["run", &p, "both", "--unchecked"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("continuation applied a second time"));
}

#[test]
fn verify_is_seeded_and_reports_tight_slack() {
    let args = ["verify", &program("sqdist"), "--trials", "30", "--seed", "9", "--json"];
    let a = aara(&args);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&aara(&args)));
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["seed"], 9);
    assert_eq!(v["min_slack"], "0");
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
    let text = stdout(&aara(&["verify", &program("sqdist"), "--trials", "5"]));
    assert!(text.contains("seed: 1"));
    assert!(text.contains("minSlack: 0"));
}

#[test]
fn verify_of_an_unsolvable_entry_exits_2() {
    assert_eq!(code(&aara(&["verify", &program("store_lists_q_naive"), "--trials", "2"])), 2);
}

fn copy_corpus(to: &Path) {
    for e in fs::read_dir(corpus()).unwrap() {
        let p = e.unwrap().path();
        fs::copy(&p, to.join(p.file_name().unwrap())).unwrap();
    }
}

#[test]
fn bench_matches_every_golden_in_name_order() {
    let o = aara(&["bench", corpus().to_str().unwrap(), "--json", "--trials", "2"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let names: Vec<&str> = v["programs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["name"].as_str().unwrap())
        .collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert!(names.contains(&"store_lists_q_naive"));
    for p in v["programs"].as_array().unwrap() {
        assert_eq!(p["matches"], true, "{p}");
        assert!(p["mean_ms"].as_f64().is_some());
    }
}

#[test]
fn bench_golden_mismatch_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    copy_corpus(dir.path());
    let g = dir.path().join("sqdist.golden");
    let text = fs::read_to_string(&g).unwrap().replace("constraint=q1+q2==1", "constraint=q1+q2==2");
    fs::write(&g, text).unwrap();
    let o = aara(&["bench", dir.path().to_str().unwrap(), "--trials", "1"]);
    assert_eq!(code(&o), 5);
    assert!(stdout(&o).contains("MISMATCH"));
}

#[test]
fn bench_missing_golden_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    copy_corpus(dir.path());
    fs::remove_file(dir.path().join("zip.golden")).unwrap();
    let o = aara(&["bench", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("zip.golden"));
}
