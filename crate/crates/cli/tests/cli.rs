use std::process::{Command, Output};

use a1_bellman::dyadic::PairDocument;

const BIN: &str = env!("CARGO_BIN_EXE_a1-bellman");
const GOLDEN: &str = include_str!("golden/plot_data_Q10_d2.csv");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("BELLMAN_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn eval_examples() {
    let o = run(&["eval", "--Q", "10", "--d", "2", "--x", "0.25", "--y", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert!(lines[0].starts_with("# a1-bellman "));
    assert_eq!(lines[1], "9.25");
    assert_eq!(lines[2], "upper branch, node k=1");

    let s = stdout(&run(&["eval", "--Q", "10", "--d", "2", "--x", "1", "--y", "7"]));
    assert_eq!(s.lines().nth(1), Some("7"));
    assert_eq!(s.lines().nth(2), Some("lower branch"));

    let s = stdout(&run(&["eval", "--Q", "10", "--d", "2", "--x", "0.5", "--y", "20", "--m", "2"]));
    assert_eq!(s.lines().nth(1), Some("19"));
}

#[test]
fn domain_and_usage_errors_exit_2() {
    let o = run(&["eval", "--Q", "10", "--d", "2", "--x", "2", "--y", "7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not in"));
    assert_eq!(run(&["eval", "--Q", "10", "--x", "0.5", "--y", "7"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--Q", "0.5", "--d", "2", "--x", "0.5", "--y", "1"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    let o = run(&["extremize", "--Q", "10", "--d", "2", "--x", "0.5", "--y", "5.5", "--depth", "40"]);
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(BIN)
        .args(["eval", "--Q", "10", "--d", "2", "--x", "0.5", "--y", "5"])
        .env("BELLMAN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn plot_data_matches_golden_file() {
    let a = stdout(&run(&["plot-data", "--Q", "10", "--d", "2"]));
    let b = stdout(&run(&["plot-data", "--Q", "10", "--d", "2"]));
    assert_eq!(a, b);
    assert_eq!(a, GOLDEN);
}

#[test]
fn plot_data_rows() {
    let s = stdout(&run(&["plot-data", "--Q", "10", "--d", "2", "--points", "2"]));
    let rows: Vec<Vec<f64>> = s
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert!(xs.contains(&1.0) && xs.contains(&0.5) && xs.contains(&0.0625));
    for r in &rows {
        assert!(r[1] <= r[2] * (1.0 + 1e-15), "{r:?}");
    }
    for (x, v) in [(1.0, 10.0), (0.25, 9.25), (0.0625, 8.55625)] {
        let r = rows.iter().find(|r| r[0] == x).unwrap();
        assert!((r[1] - v).abs() < 1e-12 && (r[2] - v).abs() < 1e-12);
    }
    let half = rows.iter().find(|r| r[0] == 0.5).unwrap();
    assert!(half[1] < half[2]);
    assert_eq!(run(&["plot-data", "--Q", "10", "--d", "2", "--points", "1"]).status.code(), Some(2));
}

#[test]
fn extremize_writes_pair() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pair.json");
    let o = run(&[
        "extremize", "--Q", "10", "--d", "2", "--x", "0.0625", "--y", "10", "--depth", "8", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("gap       0e0"));
    let text = std::fs::read_to_string(&path).unwrap();
    let doc = PairDocument::parse(&text).unwrap();
    let (_, w, e) = doc.decode::<f64>().unwrap();
    assert_eq!(e.measure(), 0.0625);
    assert_eq!(w.ess_inf(), 1.0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["target"]["x"], 0.0625);
    assert_eq!(v["achieved"]["value"], 8.55625);
    assert!(v["depth"].is_number());

    let o = run(&["extremize", "--Q", "10", "--d", "2", "--x", "0.3", "--y", "8", "--depth", "20", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let gap = v["result"]["gap"].as_f64().unwrap();
    assert!((0.0..=1e-4).contains(&gap), "{gap}");
}

#[test]
fn verify_suites() {
    let o = run(&["verify", "--Q", "10", "--d", "2", "--suite", "main-inequality-M", "--samples", "100000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS main-inequality-M samples=100000"));

    let o = run(&["verify", "--Q", "2", "--d", "1", "--suite", "all", "--samples", "5000", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["reports"].as_array().unwrap().len(), 10);
    assert_eq!(v["config"]["seed"], 0);

    // An impossible tolerance turns slack of order 1e-15 into a reported failure.
    let o = run(&["verify", "--Q", "10", "--d", "2", "--suite", "concavity", "--samples", "2000", "--tol=-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("witness:"));
}

#[test]
fn verify_is_identical_across_thread_counts() {
    let args = ["verify", "--Q", "5", "--d", "3", "--suite", "wedge-inequality", "--samples", "20000", "--seed", "3"];
    let one = Command::new(BIN).args(args).env("BELLMAN_THREADS", "1").output().unwrap();
    let four = Command::new(BIN).args(args).env("BELLMAN_THREADS", "4").output().unwrap();
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.status.code(), Some(0));
}

#[test]
fn oracle_runs() {
    let o = run(&["oracle", "--Q", "2", "--d", "1", "--depth", "2", "--grid", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS oracle-vs-closed-form"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("oracle.csv");
    let o = run(&[
        "oracle", "--Q", "2", "--d", "1", "--depth", "1", "--grid", "3", "--format", "csv", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().nth(1), Some("x,y,m,value,witness_id"));
    assert_eq!(run(&["oracle", "--Q", "2", "--d", "3", "--depth", "3"]).status.code(), Some(2));
}

#[test]
fn table_formats() {
    let s = stdout(&run(&["table", "--Q", "10", "--d", "2", "--nx", "3", "--ny", "3"]));
    let mut lines = s.lines();
    assert!(lines.next().unwrap().starts_with("# a1-bellman"));
    assert_eq!(lines.next(), Some("x,y,m,value"));
    assert_eq!(lines.count(), 9);
    let o = run(&["table", "--Q", "10", "--d", "2", "--nx", "2", "--ny", "2", "--m", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"].as_array().unwrap().len(), 4);
}
