use std::path::Path;
use std::process::{Command, Output};

fn pbf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbf")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn simulate(dir: &Path, scenario: &str, seed: &str, extra: &[&str]) {
    let mut args = vec![
        "simulate", "--scenario", scenario, "--n", "8", "--seed", seed,
        "--out-dir", dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let out = pbf(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_is_byte_identical_for_a_seed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    simulate(a.path(), "ex4i", "42", &["--r", "1"]);
    simulate(b.path(), "ex4i", "42", &["--r", "1"]);
    for f in ["x.csv", "y.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap()
        );
    }
}

#[test]
fn test_round_trip_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "ex5i", "7", &["--sigma", "2"]);
    let x = dir.path().join("x.csv");
    let y = dir.path().join("y.csv");
    let args = [
        "test", x.to_str().unwrap(), y.to_str().unwrap(), "--repr", "coeff",
        "--phi", "log", "--B", "199", "--seed", "5",
    ];
    let first = json(&pbf(&args));
    let second = json(&pbf(&args));
    assert_eq!(first, second);
    assert_eq!(first["B"], 199);
    assert_eq!(first["phi"], "log");
    for key in ["zeta_hat", "scaled", "p_value", "mode", "n", "m", "seed", "reject"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    let p = first["p_value"].as_f64().unwrap();
    assert!(p > 0.0 && p <= 1.0);
}

#[test]
fn identical_files_give_p_value_one() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "ex1", "3", &[]);
    let x = dir.path().join("x.csv");
    let got = json(&pbf(&["test", x.to_str().unwrap(), x.to_str().unwrap(), "--seed", "1"]));
    assert_eq!(got["p_value"], 1.0);
}

#[test]
fn exit_codes() {
    assert_eq!(pbf(&["bogus"]).status.code(), Some(1));
    assert_eq!(pbf(&["--help"]).status.code(), Some(0));
    assert_eq!(pbf(&["test", "/does/not/exist.csv", "/nor/this.csv"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,2\n3\n").unwrap();
    let s = bad.to_str().unwrap();
    assert_eq!(pbf(&["test", s, s, "--header", "no"]).status.code(), Some(2));
    assert_eq!(pbf(&["power", "--scenario", "ex99"]).status.code(), Some(1));
}

#[test]
fn spectrum_columns() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "ex1", "9", &[]);
    let x = dir.path().join("x.csv");
    let y = dir.path().join("y.csv");
    let out = pbf(&[
        "spectrum", x.to_str().unwrap(), y.to_str().unwrap(), "--phi", "exp",
        "--draws", "5000", "--seed", "1", "--probs", "0.5,0.95",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    let eig: Vec<f64> = rows.iter().filter(|r| &r[0] == "eigenvalue").map(|r| r[2].parse().unwrap()).collect();
    let q: Vec<f64> = rows.iter().filter(|r| &r[0] == "quantile").map(|r| r[2].parse().unwrap()).collect();
    assert!(!eig.is_empty());
    assert!(eig.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(q.len(), 2);
    assert!(q[0] <= q[1]);
}

#[test]
fn power_appends_ledger_rows() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("ledger.csv");
    let l = ledger.to_str().unwrap();
    for _ in 0..2 {
        let got = json(&pbf(&[
            "power", "--scenario", "ex2", "--n", "6", "--reps", "4", "--B", "19",
            "--seed", "1", "--phi", "exp", "--ledger", l,
        ]));
        assert_eq!(got["reps_done"], 4);
    }
    let text = std::fs::read_to_string(&ledger).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("scenario,"));
    assert_eq!(lines[1], lines[2]);
}

#[test]
fn sweep_reports_each_value() {
    let got = json(&pbf(&[
        "sweep", "--scenario", "ex4i", "--param", "r", "--values", "0,2",
        "--n", "6", "--reps", "3", "--B", "19", "--seed", "2", "--phi", "l2",
    ]));
    let rows = got.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["value"], 0.0);
    assert_eq!(rows[1]["value"], 2.0);
}
