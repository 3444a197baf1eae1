use std::process::{Command, Output};

use hsw_consensus::graph::Graph;

fn hsw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsw"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn generate_writes_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.edges");
    let o = hsw(&[
        "generate",
        "--r",
        "2",
        "--g",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("# n=15 m=34"));
    let g = Graph::from_edge_list(&text).unwrap();
    assert_eq!((g.n(), g.m()), (15, 34));
}

#[test]
fn generate_json_descriptor() {
    let o = hsw(&["generate", "--r", "3", "--g", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], 13);
    assert_eq!(v["m"], 21);
}

#[test]
fn spectrum_verify_matches_table() {
    let o = hsw(&["spectrum", "--r", "2", "--g", "3", "--verify"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let pairs: Vec<(f64, u64)> = v["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p["lambda"].as_f64().unwrap(), p["mult"].as_u64().unwrap()))
        .collect();
    assert_eq!(
        pairs,
        [
            (0.0, 1),
            (1.0, 1),
            (2.0, 2),
            (3.0, 4),
            (5.0, 4),
            (8.0, 2),
            (15.0, 1)
        ]
    );
}

#[test]
fn delay_example_diverges() {
    let o = hsw(&[
        "simulate",
        "--protocol",
        "delay",
        "--family",
        "star",
        "--n",
        "3",
        "--eps",
        "1.1",
        "--dt",
        "0.001",
        "--steps",
        "200000",
        "--seed",
        "7",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["diverged"], true);
    assert_eq!(v["pass"], true);
}

#[test]
fn floats_use_seventeen_digits() {
    let o = hsw(&["coherence", "--r", "2", "--g", "1"]);
    let text = stdout(&o);
    assert!(
        text.contains("\"spectral\": 2.2222222222222221e-1"),
        "{text}"
    );
}

#[test]
fn compare_flags_even_cycle() {
    let o = hsw(&["compare", "--n", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text
        .lines()
        .any(|l| l.starts_with("cycle,10,") && l.ends_with(",false")));
    assert!(text
        .lines()
        .any(|l| l.starts_with("star,10,") && l.ends_with(",true")));
}

#[test]
fn usage_errors() {
    assert_eq!(hsw(&["simulate"]).status.code(), Some(2));
    assert_eq!(
        hsw(&["generate", "--r", "0", "--g", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(hsw(&["bogus"]).status.code(), Some(2));
}

#[test]
fn trace_csv_is_reproducible() {
    let args = [
        "simulate",
        "--protocol",
        "noise2",
        "--family",
        "path",
        "--n",
        "3",
        "--seed",
        "4",
        "--format",
        "csv",
    ];
    let a = hsw(&args);
    let b = hsw(&args);
    assert!(a.status.code().is_some_and(|c| c <= 1));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("t,x_0,x_1,x_2,"));
}
