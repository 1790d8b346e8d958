use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ldsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldsim")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn example2_file(dir: &Path) -> String {
    let path = dir.join("ex2.json");
    let p = path.to_str().unwrap().to_string();
    assert!(ldsim(&["scenario", "--kind", "example2", "--out", &p]).status.success());
    p
}

#[test]
fn scenario_example2_matches_figure() {
    let doc = stdout_json(&ldsim(&["scenario", "--kind", "example2"]));
    let ps: Vec<f64> = doc["agents"].as_array().unwrap().iter().map(|a| a["p"].as_f64().unwrap()).collect();
    assert_eq!(ps, vec![1.0, 0.5, 0.7, 0.6, 0.5]);
    assert_eq!(doc["edges"], serde_json::json!([[3, 1], [3, 2], [4, 2]]));
}

#[test]
fn scenario_star_matches_figure() {
    let doc = stdout_json(&ldsim(&["scenario", "--kind", "star", "--n", "7", "--epsilon", "0.01"]));
    let ps: Vec<f64> = doc["agents"].as_array().unwrap().iter().map(|a| a["p"].as_f64().unwrap()).collect();
    assert_eq!(ps, vec![0.0, 0.0, 0.0, 0.99, 0.98, 0.99, 0.99]);
    assert_eq!(doc["edges"], serde_json::json!([[3, 4], [5, 4], [6, 4]]));
}

#[test]
fn scenario_random_has_roles() {
    let doc = stdout_json(&ldsim(&["scenario", "--kind", "random", "--n", "20", "--k", "3", "--seed", "4"]));
    assert_eq!(doc["roles"].as_object().unwrap().len(), 20);
    assert_eq!(doc["edges"].as_array().unwrap().len(), 60);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(ldsim(&["scenario", "--kind", "star", "--n", "6"]).status.code(), Some(2));
    assert_eq!(ldsim(&["scenario", "--kind", "star"]).status.code(), Some(2));
    assert_eq!(ldsim(&["scenario", "--kind", "pentagon"]).status.code(), Some(2));
    assert_eq!(ldsim(&["jury", "--p", "1.5", "--n-max", "5"]).status.code(), Some(2));
    assert_eq!(ldsim(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn io_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ldsim(&["accuracy", "--scenario", "/nonexistent/x.json"]).status.code(), Some(1));
    let bad = write(dir.path(), "bad.json", r#"{"agents":[],"edges":[],"surprise":true}"#);
    assert_eq!(ldsim(&["accuracy", "--scenario", &bad]).status.code(), Some(1));
}

#[test]
fn accuracy_all_profiles_example2() {
    let dir = tempfile::tempdir().unwrap();
    let ex2 = example2_file(dir.path());
    let report = stdout_json(&ldsim(&["accuracy", "--scenario", &ex2, "--all-profiles"]));
    assert_eq!(report["count"], 6);
    assert!((report["min"].as_f64().unwrap() - 0.675).abs() < 1e-9);
    assert!((report["max"].as_f64().unwrap() - 0.85).abs() < 1e-9);
}

#[test]
fn accuracy_explicit_all_direct() {
    let dir = tempfile::tempdir().unwrap();
    let ex2 = example2_file(dir.path());
    let profile = write(dir.path(), "p.json", r#"{"0":"direct","1":"direct","2":"direct","3":"direct","4":"direct"}"#);
    let report = stdout_json(&ldsim(&["accuracy", "--scenario", &ex2, "--profile", &profile]));
    assert!((report["exact"]["value"].as_f64().unwrap() - 0.795).abs() < 1e-9);
    assert_eq!(report["exact"]["method"], "exact-dp");
}

#[test]
fn accuracy_monte_carlo_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let ex2 = example2_file(dir.path());
    let profile = write(dir.path(), "p.json", r#"{"3":"1","4":"2"}"#);
    let args = ["accuracy", "--scenario", &ex2, "--profile", &profile, "--mc", "200000", "--seed", "7"];
    let a = ldsim(&args);
    let b = ldsim(&args);
    assert_eq!(a.stdout, b.stdout);
    let report = stdout_json(&a);
    let mc = &report["monte_carlo"];
    let (value, stderr) = (mc["value"].as_f64().unwrap(), mc["stderr"].as_f64().unwrap());
    assert!((value - 0.85).abs() <= 5.0 * stderr);
}

#[test]
fn invalid_profiles_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let ex2 = example2_file(dir.path());
    let non_edge = write(dir.path(), "ne.json", r#"{"0":"1"}"#);
    assert_eq!(ldsim(&["accuracy", "--scenario", &ex2, "--profile", &non_edge]).status.code(), Some(3));
    let cyc_net = write(
        dir.path(),
        "cyc.json",
        r#"{"agents":[{"id":0,"p":0.5},{"id":1,"p":0.5}],"edges":[[0,1],[1,0]],"profile":{"0":"1","1":"0"}}"#,
    );
    assert_eq!(ldsim(&["accuracy", "--scenario", &cyc_net]).status.code(), Some(3));
}

#[test]
fn odp_example2_and_search_guard() {
    let dir = tempfile::tempdir().unwrap();
    let ex2 = example2_file(dir.path());
    let sol = stdout_json(&ldsim(&["odp", "--scenario", &ex2]));
    assert!((sol["accuracy"].as_f64().unwrap() - 0.85).abs() < 1e-9);
    assert_eq!(sol["profile"]["3"], "1");
    assert_eq!(sol["profile"]["4"], "2");
    let heuristic = stdout_json(&ldsim(&["odp", "--scenario", &ex2, "--heuristic", "--iters", "1000", "--seed", "1"]));
    assert!((heuristic["accuracy"].as_f64().unwrap() - 0.85).abs() < 1e-9);

    // 25 agents with two options each: 2^25 raw profiles.
    let agents: Vec<String> = (0..26).map(|i| format!(r#"{{"id":{i},"p":0.6}}"#)).collect();
    let edges: Vec<String> = (0..25).map(|i| format!("[{i},25]")).collect();
    let big = write(
        dir.path(),
        "big.json",
        &format!(r#"{{"agents":[{}],"edges":[{}]}}"#, agents.join(","), edges.join(",")),
    );
    assert_eq!(ldsim(&["odp", "--scenario", &big]).status.code(), Some(4));
    assert_eq!(ldsim(&["accuracy", "--scenario", &big, "--all-profiles"]).status.code(), Some(4));
    assert!(ldsim(&["odp", "--scenario", &big, "--heuristic", "--iters", "200"]).status.success());
}

#[test]
fn dynamics_writes_csv_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", r#"{"n":30,"cap":6,"seed":2,"edges":{"kind":"random_out_degree","k":4}}"#);
    let out = dir.path().join("run.csv");
    let out_s = out.to_str().unwrap();
    let status = ldsim(&["dynamics", "--config", &config, "--epochs", "25", "--seed", "3", "--out", out_s]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("epoch,result,accuracy,neg_alpha_frac,max_weight,guru_count"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 25);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 6);
        assert!(fields[1] == "correct" || fields[1] == "incorrect");
        assert!(fields[4].parse::<u32>().unwrap() <= 6);
    }
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "dynamics");
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["config"]["epochs"], 25);
}

#[test]
fn jury_curves() {
    let flat = ldsim(&["jury", "--p", "0.5", "--n-max", "11"]);
    let text = String::from_utf8(flat.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "n,accuracy");
    assert_eq!(rows.len(), 7);
    assert!(rows[1..].iter().all(|r| r.ends_with(",0.5")));

    let rising = String::from_utf8(ldsim(&["jury", "--p", "0.6", "--n-max", "101"]).stdout).unwrap();
    let last = rising.lines().last().unwrap();
    let (n, acc) = last.split_once(',').unwrap();
    assert_eq!(n, "101");
    assert!(acc.parse::<f64>().unwrap() > 0.97);
}
