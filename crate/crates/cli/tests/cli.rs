use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dimkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dimkit")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const C6: &str = "6 6\n0 1\n1 2\n2 3\n3 4\n4 5\n0 5\n";
const C4: &str = "# a square\n4 4\n0 1\n1 2\n2 3\n0 3\n";

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let c6 = write(dir.path(), "c6.graph", C6);
    let c4 = write(dir.path(), "c4.graph", C4);

    let out = dimkit(&["solve", &c6, "--json"]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["status"], "dim");
    assert_eq!(report["matching"].as_array().unwrap().len(), 2);
    assert_eq!(report["p9_checked"], false);
    for key in ["edges_tried", "forced_edges", "branches", "millis"] {
        assert!(report["stats"][key].is_u64(), "{key}");
    }

    assert_eq!(code(&dimkit(&["solve", &c4])), 1);
}

#[test]
fn input_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let c6 = write(dir.path(), "c6.graph", C6);
    let bad = write(dir.path(), "bad.graph", "3 2\n0 1\n0 1\n");
    assert_eq!(code(&dimkit(&["solve", &bad])), 3);
    assert_eq!(code(&dimkit(&["solve", "/nonexistent/x.graph"])), 3);
    assert_eq!(code(&dimkit(&["solve", &c6, "--no-such-flag"])), 3);
    assert_eq!(code(&dimkit(&["frobnicate"])), 3);
    let junk = write(dir.path(), "junk.matching", "0 x\n");
    assert_eq!(code(&dimkit(&["verify", &c6, &junk])), 3);
    let absent = write(dir.path(), "absent.matching", "0 2\n");
    assert_eq!(code(&dimkit(&["verify", &c6, &absent])), 3);
}

#[test]
fn verify_valid_and_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let c6 = write(dir.path(), "c6.graph", C6);
    let good = write(dir.path(), "good.matching", "0 1\n3 4\n");
    let short = write(dir.path(), "short.matching", "0 1\n");
    let out = dimkit(&["verify", &c6, &good]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "valid");
    let out = dimkit(&["verify", &c6, &short, "--json"]);
    assert_eq!(code(&out), 1);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["valid"], false);
    assert_eq!(v["violation"]["kind"], "Undominated");
}

#[test]
fn oracle_counts() {
    let dir = tempfile::tempdir().unwrap();
    let c6 = write(dir.path(), "c6.graph", C6);
    let out = dimkit(&["oracle", &c6, "--all", "--json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["count"], 3);
    let c4 = write(dir.path(), "c4.graph", C4);
    assert_eq!(code(&dimkit(&["oracle", &c4])), 1);
}

#[test]
fn cross_check_finds_no_disagreements() {
    let out = dimkit(&["cross-check", "--max-n", "8", "--count", "5000", "--seed", "1"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains(" 0 disagreements"), "{}", stdout(&out));
}

#[test]
fn gen_writes_manifest_and_cross_checks_it() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("corpus");
    let out_str = out_dir.to_str().unwrap();
    let out = dimkit(&["gen", "planted", "--n", "16", "--count", "4", "--seed", "5", "--connected", "--check-p9", "--out", out_str]);
    assert_eq!(code(&out), 0);
    let manifest = fs::read_to_string(out_dir.join("manifest.jsonl")).unwrap();
    let lines: Vec<Value> = manifest.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4);
    for (i, line) in lines.iter().enumerate() {
        assert_eq!(line["label"], "dim");
        assert_eq!(line["seed"], 5 + i as u64);
        assert_eq!(line["n"], 16);
        assert!(line["p9_free"].is_boolean());
        let graph = out_dir.join(line["path"].as_str().unwrap());
        let matching = graph.with_extension("matching");
        let verdict = dimkit(&["verify", graph.to_str().unwrap(), matching.to_str().unwrap()]);
        assert_eq!(code(&verdict), 0);
    }
    let out = dimkit(&["gen", "no-dim", "--n", "14", "--count", "3", "--out", out_str]);
    assert_eq!(code(&out), 0);
    let out = dimkit(&["cross-check", "--corpus", out_str]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("7 instances, 0 disagreements"), "{}", stdout(&out));
}

#[test]
fn gen_is_reproducible() {
    let a = dimkit(&["gen", "random", "--n", "12", "--p", "0.3", "--seed", "9", "--k4-free"]);
    let b = dimkit(&["gen", "random", "--n", "12", "--p", "0.3", "--seed", "9", "--k4-free"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(code(&dimkit(&["gen", "random", "--n", "4", "--p", "1.0", "--k4-free", "--max-attempts", "5"])), 3);
}

#[test]
fn small_corpus_labels() {
    let dir = tempfile::tempdir().unwrap();
    let out = dimkit(&["gen", "small", "--max-n", "4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let manifest = fs::read_to_string(dir.path().join("manifest.jsonl")).unwrap();
    // 1 + 2 + 6 connected graphs on 2..=4 vertices
    assert_eq!(manifest.lines().count(), 9);
    let no_dim = manifest.lines().filter(|l| l.contains("\"no-dim\"")).count();
    // C4 and K4
    assert_eq!(no_dim, 2);
}

#[test]
fn solve_json_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dimkit(&["gen", "planted", "--n", "400", "--seed", "2", "--connected"]);
    let g = write(dir.path(), "p.graph", &stdout(&out));
    let a = dimkit(&["solve", &g, "--json", "--check-p9"]);
    let b = dimkit(&["solve", &g, "--json", "--check-p9"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn check_reports_patterns() {
    let dir = tempfile::tempdir().unwrap();
    // diamond: mid-edge 0-1, tips 2 and 3
    let g = write(dir.path(), "d.graph", "4 5\n0 1\n0 2\n0 3\n1 2\n1 3\n");
    let out = dimkit(&["check", &g, "--json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["diamonds"], 1);
    assert_eq!(v["forced_edges"], serde_json::json!([[0, 1]]));
    assert_eq!(v["k4"], Value::Null);
}

#[test]
fn bench_emits_csv() {
    let out = dimkit(&["bench", "--max-n", "500", "--no-dim-family"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,m,millis,status");
    assert_eq!(lines.len(), 3);
    assert!(lines[1..].iter().all(|l| l.ends_with(",no-dim")));
}

#[test]
fn explain_dumps_json() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "c6.graph", C6);
    let out = dimkit(&["explain", &g]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(!v["trials"].as_array().unwrap().is_empty());
}
