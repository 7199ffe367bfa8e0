//! End-to-end runs of the binary: every subcommand once, plus exit-code
//! categories for the error classes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mc-cli"))
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

struct Fixture {
    _dir: tempfile::TempDir,
    graph: String,
    cascades: String,
    priority: String,
}

/// Deterministic merge instance: two sources race into a relay, relay and a
/// third source race into a sink.
fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "graph.txt", "0 3\n1 3\n2 4\n3 5\n4 5\n");
    let cascades = write(
        dir.path(),
        "cascades.txt",
        "cascade 0 P 0\ncascade 1 P 1\ncascade 2 P 2\ncascade 3 P\nstar 3\n",
    );
    let priority = write(
        dir.path(),
        "priority.txt",
        "mode explicit\n\
         node 0 2 3 4 1\n\
         node 1 2 3 4 1\n\
         node 2 2 3 4 1\n\
         node 3 3 2 4 1\n\
         node 4 2 3 4 1\n\
         node 5 2 4 3 1\n",
    );
    Fixture {
        _dir: dir,
        graph,
        cascades,
        priority,
    }
}

#[test]
fn simulate_prints_the_expected_trace() {
    let f = fixture();
    let out = bin()
        .args([
            "simulate",
            "--graph",
            &f.graph,
            "--prob",
            "uniform:1.0",
            "--cascades",
            &f.cascades,
            "--priority",
            &f.priority,
            "--trace",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("3 P1 1"), "relay adopts P1:\n{text}");
    assert!(text.contains("5 P3 2"), "sink adopts P3:\n{text}");
    assert!(text.contains("not_m_active = 6"));
}

#[test]
fn estimate_exact_matches_the_coin_flip_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "graph.txt", "0 1 0.5\n");
    let cascades = write(
        dir.path(),
        "cascades.txt",
        "cascade 0 M 0\ncascade 1 P\nstar 1\n",
    );
    let priority = write(dir.path(), "priority.txt", "mode homogeneous\n");
    let out = bin()
        .args([
            "estimate", "--graph", &graph, "--cascades", &cascades, "--priority", &priority,
            "--exact",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("f_m = 1.5"), "{text}");
    assert!(text.contains("f_not_m = 0.5"), "{text}");
}

#[test]
fn solve_selects_seeds_and_reports_the_ratio() {
    let f = fixture();
    let out = bin()
        .args([
            "solve",
            "--graph",
            &f.graph,
            "--prob",
            "uniform:0.5",
            "--cascades",
            &f.cascades,
            "--priority",
            &f.priority,
            "--method",
            "sandwich",
            "--budget",
            "2",
            "--exact",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("seeds = "), "{text}");
    assert!(text.contains("bound_ratio = "), "{text}");
}

#[test]
fn reduce_checks_every_selection_and_emits_a_runnable_instance() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write(dir.path(), "pspc.txt", "2 1 2\nx1 y1\nx2\n");
    let emit = dir.path().join("emitted");
    let out = bin()
        .args([
            "reduce",
            "--instance",
            &instance,
            "--enumerate",
            "--emit-dir",
            emit.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).lines().filter(|l| l.ends_with("true")).count() >= 4);

    // the emitted files replay through `simulate`
    let out = bin()
        .args([
            "simulate",
            "--graph",
            emit.join("graph.txt").to_str().unwrap(),
            "--prob",
            "from-file",
            "--cascades",
            emit.join("cascades.txt").to_str().unwrap(),
            "--priority",
            emit.join("priority.txt").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("m_active = 5"), "{}", stdout(&out));
}

#[test]
fn experiment_writes_the_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "config.json",
        r#"{
            "graph": {"type": "erdos_renyi", "nodes": 20, "edge_prob": 0.08, "seed": 2},
            "probability_mode": {"type": "uniform", "p": 0.3},
            "cascades": {"misinformation": 1, "positive": 1, "seed_size": 1,
                         "seeding": {"type": "influence", "replications": 50}},
            "priority": {"mode": "random", "seed": 6},
            "budgets": [1, 2],
            "estimator": {"r_opt": 60, "r_eval": 120, "base_seed": 3},
            "methods": ["sandwich", "high_weight"],
            "random_trials": 10
        }"#,
    );
    let csv = dir.path().join("report.csv");
    let json = dir.path().join("report.json");
    let out = bin()
        .args([
            "experiment",
            "--config",
            &config,
            "--csv",
            csv.to_str().unwrap(),
            "--json",
            json.to_str().unwrap(),
            "--quiet",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("method,budget,"));
    assert_eq!(csv_text.trim_end().lines().count(), 1 + 4);
    let json_text = std::fs::read_to_string(&json).unwrap();
    assert!(json_text.contains("\"config_hash\""));
}

#[test]
fn verify_subcommand_passes_on_the_reduction_suite() {
    let out = bin()
        .args(["verify", "--suite", "reduction"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("reduction-identity: PASS"));
}

#[test]
fn error_classes_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cascades = write(dir.path(), "c.txt", "cascade 0 M 0\ncascade 1 P\nstar 1\n");
    let priority = write(dir.path(), "p.txt", "mode homogeneous\n");

    // parse error -> 2
    let bad_graph = write(dir.path(), "bad.txt", "0 1\nnot numbers\n");
    let out = bin()
        .args(["simulate", "--graph", &bad_graph, "--cascades", &cascades, "--priority", &priority])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // validation error (self-loop) -> 3
    let loop_graph = write(dir.path(), "loop.txt", "0 0\n");
    let out = bin()
        .args(["simulate", "--graph", &loop_graph, "--cascades", &cascades, "--priority", &priority])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{out:?}");

    // capacity error (too many uncertain edges for the exact oracle) -> 4
    let mut chain = String::new();
    for i in 0..25 {
        chain.push_str(&format!("{} {} 0.5\n", i, i + 1));
    }
    let big = write(dir.path(), "big.txt", &chain);
    let out = bin()
        .args([
            "estimate", "--graph", &big, "--cascades", &cascades, "--priority", &priority,
            "--exact",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4), "{out:?}");

    // i/o error (missing file) -> 5
    let out = bin()
        .args([
            "simulate",
            "--graph",
            dir.path().join("missing.txt").to_str().unwrap(),
            "--cascades",
            &cascades,
            "--priority",
            &priority,
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5), "{out:?}");
}
