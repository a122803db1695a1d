use serde_json::{json, Value};
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatmod")).args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn m11(dir: &Path) -> String {
    let p = dir.join("m11.json");
    let g = json!({"darts": 6, "vertex_cycles": [[0, 1, 2], [3, 4, 5]], "edge_pairing": [[0, 3], [1, 4], [2, 5]]});
    std::fs::write(&p, g.to_string()).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn validate_good_and_bad_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let good = m11(dir.path());
    let o = run(&["graph", "validate", &good]);
    assert_eq!(o.status.code(), Some(0));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"darts": 6, "vertex_cycles": [[0,1,2],[3,4,5]], "edge_pairing": [[0,0],[1,4],[2,5]]}"#).unwrap();
    let o = run(&["graph", "validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "not json").unwrap();
    assert_eq!(run(&["graph", "validate", junk.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["graph", "validate", "/nonexistent/graph.json"]).status.code(), Some(2));
}

#[test]
fn enumerate_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("graphs");
    let o = run(&["graph", "enumerate", "--genus", "1", "--faces", "2", "--trivalent", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(&out).unwrap().count(), 5);
    for f in std::fs::read_dir(&out).unwrap() {
        let p = f.unwrap().path();
        assert_eq!(run(&["cover", "darboux", p.to_str().unwrap()]).status.code(), Some(0));
    }
}

#[test]
fn forms_and_cover_commands() {
    let dir = tempfile::tempdir().unwrap();
    let g = m11(dir.path());
    for args in [["forms", "kontsevich"], ["forms", "bivector"], ["forms", "mk-check"], ["cover", "build"], ["cover", "homology"]] {
        let o = run(&[args[0], args[1], &g]);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        stdout_json(&o);
    }
}

#[test]
fn dehn_twist_on_m11() {
    let dir = tempfile::tempdir().unwrap();
    let g = m11(dir.path());
    let o = run(&["moves", "dehn", &g, "--edge", "0", "--edge2", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!(v.to_string().contains("\"k_minus\":\"2\""));
}

#[test]
fn ledger_from_units() {
    let o = run(&["tau", "ledger", "--units", "1,13,13,25"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    let rels: Vec<String> = serde_json::from_value(v["relations"].clone()).unwrap();
    assert_eq!(rels[2], "(12)·kappa_1 = (1)·W11 + (1)·W5");
    assert_eq!(run(&["tau", "ledger", "--units", "1,13"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["graph"]).status.code(), Some(2));
    assert_eq!(run(&["boutroux", "seed", "--model", "hexagon"]).status.code(), Some(2));
}

#[test]
fn loop_then_monodromy() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("loop.json");
    let o = run(&["boutroux", "loop", "--model", "pentagon", "--t", "0.1", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["walls"], 5);
    let o = run(&["tau", "monodromy", "--path", path.to_str().unwrap(), "--which", "minus"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["units"], 13);
}

#[test]
fn suite_config_errors_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("big.json");
    std::fs::write(&cfg, r#"{"targets": [[3, 2]]}"#).unwrap();
    assert_eq!(run(&["suite", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));

    // Zero tolerances cannot be met by the numerical criteria; the exact ones still pass.
    let cfg = dir.path().join("strict.json");
    std::fs::write(&cfg, r#"{"angle_tolerance": 0.0, "eta_tolerance": 0.0, "homogeneity_tolerance": 0.0, "omega_tolerance": 0.0}"#).unwrap();
    let out = dir.path().join("report.json");
    let o = run(&["suite", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v = stdout_json(&o);
    let passed: Vec<bool> = v["criteria"].as_array().unwrap().iter().map(|c| c["passed"].as_bool().unwrap()).collect();
    assert_eq!(passed.len(), 9);
    assert!(passed[..4].iter().all(|&p| p));
    assert!(!passed[4] && !passed[5]);
    assert!(out.exists());
}
