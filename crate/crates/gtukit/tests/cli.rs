use std::path::Path;
use std::process::{Command, Output};

fn gtukit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gtukit")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn decide_exit_codes() {
    let o = gtukit(&["decide", "--unit", "hampath", "--graph", "fig1c.json"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("TRUE (witness length 10,"), "{}", stdout(&o));
    let o = gtukit(&["decide", "--unit", "hampath", "--graph", "empty.json"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("FALSE"));
    let o = gtukit(&["decide", "--unit", "hampath", "--graph", "missing.json"]);
    assert_eq!(code(&o), 2);
    let o = gtukit(&["decide", "--unit", "hampath"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--graph"));
}

#[test]
fn decide_json_with_seed_is_deterministic() {
    let args = ["--json", "decide", "--unit", "stwbd(2)", "--graph", "fig1c", "--seed", "7"];
    let a = gtukit(&args);
    let b = gtukit(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["value"], true);
    assert!(v["witness"]["steps"].is_array());
}

#[test]
fn budget_exhaustion_is_reported() {
    let o = gtukit(&["decide", "--unit", "hampath", "--graph", "fig1c", "--budget", "2"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn reduce_writes_complement() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("red.json");
    let o = gtukit(&["--json", "reduce", "--red", "clique-to-independent-set", "--graph", "fig2d.json", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["length"], 12);
    // the written result is itself a valid independent-set instance
    let o = gtukit(&["decide", "--unit", "independent-set", "--graph", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
}

#[test]
fn proofs_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("ds.dot");
    let o = gtukit(&["prove-forward", "--proof", "example8", "--emit-ds", dot.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));

    let reroot = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/derivations/ex9-reroot.json");
    let w = reroot.to_str().unwrap();
    let o = gtukit(&["prove-backward", "--proof", "example9", "--witness", w]);
    assert_eq!(code(&o), 1);
    let json = dir.path().join("ds.json");
    let o = gtukit(&["--json", "prove-backward", "--proof", "example9", "--witness", w, "--preprocess", "--emit-ds", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["preprocessed"], true);
    assert_eq!(v["constructed"].as_array().unwrap().len(), 10);

    // the emitted structure loads back and renders
    let o = gtukit(&["export", "--what", "ds", "--format", "dot", "--input", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("->"));
}

#[test]
fn check_reduction_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = gtukit(&["--json", "check-reduction", "--proof", "example8", "--corpus", "standard:1-3", "--bounds", "0-3", "--limit", "10", "--seed", "1", "--jobs", "2"]);
    assert_eq!(code(&o), 0);
    let report = dir.path().join("report.json");
    std::fs::write(&report, &o.stdout).unwrap();
    let o = gtukit(&["export", "--what", "report", "--format", "json", "--input", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 10);

    let emit = dir.path().join("ds");
    let o = gtukit(&["check-reduction", "--proof", "example9", "--corpus", "connected:1-3", "--emit-ds", emit.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(std::fs::read_dir(&emit).unwrap().count() > 0);

    let o = gtukit(&["check-reduction", "--proof", "example8", "--corpus", "weird:1-3"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn independence_verdicts() {
    let o = gtukit(&["independence", "--unit", "hampath-to-2-bounded-spantree"]);
    assert!(matches!(code(&o), 0 | 1));
    let o = gtukit(&["--json", "independence", "--unit", "clique"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["independent"], false);
}

#[test]
fn export_graphs() {
    let o = gtukit(&["export", "--what", "graph", "--format", "dot", "--input", "fig1c"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).matches("dir=none").count(), 5);
    let o = gtukit(&["export", "--what", "graph", "--format", "svg", "--input", "fig1c"]);
    assert_eq!(code(&o), 2);
    let o = gtukit(&["export", "--what", "ds", "--input", "empty"]);
    assert_eq!(stdout(&o), "digraph ds {\n  node [shape=box];\n}\n");
    let o = gtukit(&["export", "--what", "graph", "--format", "json", "--input", "fig2d"]);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.json");
    std::fs::write(&p, &o.stdout).unwrap();
    let again = gtukit(&["export", "--what", "graph", "--format", "json", "--input", p.to_str().unwrap()]);
    assert_eq!(o.stdout, again.stdout);
}
