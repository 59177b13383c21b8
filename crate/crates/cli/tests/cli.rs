use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use persuade_core::generate::{dominated_target, private_action_leak, static_persuasion};
use persuade_core::model::save_problem;
use tempfile::TempDir;

fn persuade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_persuade")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&persuade(&["solve"])), 1);
    assert_eq!(code(&persuade(&["frobnicate"])), 1);
    assert_eq!(code(&persuade(&["--help"])), 0);
    let o = persuade(&["solve", "--problem", "/nonexistent/p.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn invalid_problem_lists_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(&dir, "bad.json");
    let mut spec = static_persuasion(0.3);
    spec.noise[0] = vec![0.5];
    // Written without validation on purpose.
    std::fs::write(&p, persuade_core::model::to_json(&spec).unwrap()).unwrap();
    let o = persuade(&["solve", "--problem", s(&p)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("Q_1: sums to 0.5"), "{}", stderr(&o));
}

#[test]
fn solve_verify_simulate_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(&dir, "p.json");
    save_problem(&static_persuasion(0.3), &p).unwrap();
    let (a, b) = (path(&dir, "a.json"), path(&dir, "b.json"));
    for out in [&a, &b] {
        let o = persuade(&["solve", "--problem", s(&p), "--out", s(out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(stderr(&o).contains("J0 = 0.600000000"));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let o = persuade(&["verify", "--problem", s(&p), "--solution", s(&a), "--brute-force", "--values"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("overall: PASS"), "{text}");

    let sim = |seed: &str| persuade(&["simulate", "--problem", s(&p), "--solution", s(&a), "--episodes", "5000", "--seed", seed]).stdout;
    assert_eq!(sim("9"), sim("9"));
    assert_ne!(sim("9"), sim("10"));

    let o = persuade(&["report", "--problem", s(&p), "--solution", s(&a)]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("J0 = 0.600000000"));
}

#[test]
fn infeasible_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(&dir, "p.json");
    save_problem(&dominated_target(), &p).unwrap();
    let out = path(&dir, "s.json");
    let o = persuade(&["solve", "--problem", s(&p), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("infeasible at t=2, node 0/1"), "{}", stderr(&o));
    let o = persuade(&["verify", "--problem", s(&p), "--solution", s(&out)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn belief_leak_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(&dir, "p.json");
    save_problem(&private_action_leak(), &p).unwrap();
    let o = persuade(&["solve", "--problem", s(&p)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--force"));
    assert_eq!(code(&persuade(&["solve", "--problem", s(&p), "--force"])), 0);
    assert_eq!(code(&persuade(&["check-assumptions", "--problem", s(&p)])), 1);
}

#[test]
fn examples_and_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(&dir, "c.json");
    let o = persuade(&["example", "congestion", "--k", "3", "--out", s(&p)]);
    assert_eq!(code(&o), 0);
    let o = persuade(&["inspect", "--problem", s(&p), "--memoize"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("agents: 3"), "{text}");

    let o = persuade(&["inspect", "--problem", s(&p), "--json"]);
    let tree: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let second = tree["levels"][1]["nodes"].as_array().unwrap();
    // 2 first states times 2^3 observed actions, in 2 belief classes.
    assert_eq!(second.len(), 16);
    let classes: std::collections::BTreeSet<u64> = second.iter().map(|n| n["class"].as_u64().unwrap()).collect();
    assert_eq!(classes.len(), 2);

    let mps = path(&dir, "n.mps");
    let o = persuade(&["inspect", "--problem", s(&p), "--node", "0", "--mps", s(&mps)]);
    assert_eq!(code(&o), 1, "earlier levels need a solution");
    let sol = path(&dir, "s.json");
    assert_eq!(code(&persuade(&["solve", "--problem", s(&p), "--out", s(&sol)])), 0);
    let o = persuade(&["inspect", "--problem", s(&p), "--solution", s(&sol), "--node", "0", "--mps", s(&mps)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(std::fs::read_to_string(&mps).unwrap().starts_with("NAME"));

    let r = path(&dir, "r.json");
    let o = persuade(&["example", "random", "--seed", "3", "--variant", "multi-agent", "--out", s(&r)]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&persuade(&["check-assumptions", "--problem", s(&r)])), 0);
}
