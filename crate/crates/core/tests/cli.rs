//! The `laxkit` binary end to end: exit codes, report shape, evolve and eval.

use std::path::Path;
use std::process::{Command, Output};

use laxkit::cli::{RunConfig, RunReport};

fn laxkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_laxkit")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn read_report(path: &Path) -> RunReport {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn exit_codes() {
    let ok = laxkit(&["verify", "--model", "cm-rational", "--n", "3", "--seed", "42"]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    let tight = laxkit(&["verify", "--model", "cm-rational", "--n", "3", "--check", "linear-rma", "--tol", "1e-30"]);
    assert_eq!(code(&tight), 2);
    let bogus = laxkit(&["verify", "--model", "cm-bogus", "--n", "3"]);
    assert_eq!(code(&bogus), 1);
    assert!(stderr(&bogus).contains("cm-bogus"));
    let bad_check = laxkit(&["verify", "--model", "rs-rational", "--n", "3", "--check", "linear-rma"]);
    assert_eq!(code(&bad_check), 1);
    assert_eq!(code(&laxkit(&["verify", "--model", "cm-rational", "--n", "0"])), 1);
    assert_eq!(code(&laxkit(&["--help"])), 0);
}

#[test]
fn deterministic_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    // Same command twice: the report path is part of the echoed config.
    let path = dir.path().join("r.json");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let out = laxkit(&[
            "verify",
            "--model",
            "cm-hyperbolic,cm-sunn",
            "--n",
            "2",
            "--seed",
            "3,1",
            "--deterministic-report",
            "--report",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        runs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
    let rep = read_report(&path);
    assert!(rep.timing.is_none());
    assert_eq!(rep.summary.total, rep.checks.len());
}

#[test]
fn report_echoes_a_config_that_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = laxkit(&[
        "verify",
        "--model",
        "cm-elliptic",
        "--n",
        "2",
        "--coupling",
        "-0.5,1.25",
        "--report",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let echoed = RunConfig::from_json(&v["config"].to_string()).unwrap();
    assert_eq!(echoed.params.coupling, Some([-0.5, 1.25]));

    // Feeding the echo back in reproduces the checks.
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, v["config"].to_string()).unwrap();
    let again = dir.path().join("r2.json");
    let out = laxkit(&["verify", "--config", cfg.to_str().unwrap(), "--report", again.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(read_report(&again).checks, read_report(&path).checks);
}

#[test]
fn scan_aggregates_every_job() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let out = laxkit(&[
        "scan",
        "--model",
        "cm-rational,cm-hyperbolic",
        "--n",
        "2..4",
        "--seed-count",
        "3",
        "--check",
        "linear-rma",
        "--report",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep = read_report(&path);
    assert_eq!(rep.checks.len(), 18);
    let agg = rep.aggregate.unwrap();
    assert_eq!(agg.len(), 6);
    assert!(agg.iter().all(|r| r.all_pass && r.checks == 3));

    assert_eq!(code(&laxkit(&["scan", "--model", "cm-rational", "--n", "2", "--seed-count", "0"])), 1);
}

#[test]
fn scan_keeps_compatible_checks_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let out = laxkit(&[
        "scan",
        "--model",
        "rs-elliptic",
        "--n",
        "2",
        "--check",
        "linear-rma,quadratic-rs",
        "--report",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep = read_report(&path);
    assert!(rep.checks.iter().all(|c| c.name == "quadratic-rs"));
    assert!(!rep.checks.is_empty());
}

#[test]
fn size_cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_laxkit"))
        .args(["verify", "--model", "cm-sunn", "--n", "3"])
        .env("LAXKIT_MAX_N", "4")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
}

fn table(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split('\t').map(String::from).collect();
    let rows = lines.map(|l| l.split('\t').map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn evolve_reversal_returns_to_start() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("t.tsv");
    let out = laxkit(&[
        "evolve",
        "--model",
        "cm-hyperbolic",
        "--n",
        "3",
        "--t-end",
        "2",
        "--reverse",
        "--trajectory",
        traj.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep: RunReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(rep.checks.iter().any(|c| c.name == "isospectral" && c.pass));
    let (header, rows) = table(&std::fs::read_to_string(&traj).unwrap());
    assert_eq!(&header[..4], ["t", "q1", "q2", "q3"]);
    let (first, last) = (&rows[0], rows.last().unwrap());
    assert!(last[0].abs() < 1e-12, "ends at t = {}", last[0]);
    for i in 1..=6 {
        assert!((first[i] - last[i]).abs() < 1e-9, "column {}: {} vs {}", header[i], first[i], last[i]);
    }
}

#[test]
fn free_flow_is_affine() {
    let out = laxkit(&["evolve", "--model", "cm-rational", "--n", "2", "--coupling", "0", "--t-end", "3", "--dt", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (_, rows) = table(&stdout(&out));
    assert_eq!(rows.len(), 4);
    let r0 = &rows[0];
    for r in &rows {
        for i in 0..2 {
            let (q, p) = (r[1 + i], r[3 + i]);
            assert!((p - r0[3 + i]).abs() < 1e-12);
            assert!((q - (r0[1 + i] + r0[3 + i] * r[0])).abs() < 1e-9);
        }
    }
}

fn eval(args: &[&str]) -> Output {
    let mut all = vec!["eval"];
    all.extend_from_slice(args);
    laxkit(&all)
}

fn complex_of(out: &Output) -> (f64, f64) {
    let s = stdout(out);
    let v: Vec<f64> = s.split_whitespace().map(|t| t.parse().unwrap()).collect();
    (v[0], v[1])
}

#[test]
fn eval_zeta_is_odd_and_poles_exit_two() {
    let a = complex_of(&eval(&["zeta", "0.3,0.2"]));
    let b = complex_of(&eval(&["zeta", "--x", "-0.3,-0.2"]));
    assert!((a.0 + b.0).abs() < 1e-12 && (a.1 + b.1).abs() < 1e-12);
    assert_eq!(code(&eval(&["phi", "2,0", "0.3,0.1"])), 2);
    assert_eq!(code(&eval(&["wp"])), 1);
    assert_eq!(code(&eval(&["sigma", "1", "2"])), 1);
    assert_eq!(code(&eval(&["zeta", "abc"])), 1);
    let r = complex_of(&eval(&["wp", "0.5", "--family", "rational"]));
    assert!((r.0 - 4.0).abs() < 1e-15 && r.1 == 0.0);
}

#[test]
fn eval_wp_matches_stored_table() {
    let dir = tempfile::tempdir().unwrap();
    let text = include_str!("data/wp_oracle.tsv");
    for (k, line) in text.lines().filter(|l| !l.starts_with('#')).enumerate().step_by(4) {
        let v: Vec<f64> = line.split('\t').map(|s| s.parse().unwrap()).collect();
        let cfg = dir.path().join(format!("c{k}.json"));
        let json = serde_json::json!({
            "model": "cm-elliptic",
            "n": 2,
            "params": { "half_periods": [[v[0], v[1]], [v[2], v[3]]] }
        });
        std::fs::write(&cfg, json.to_string()).unwrap();
        let x = format!("{},{}", v[4], v[5]);
        let out = eval(&["wp", "--x", &x, "--config", cfg.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let (re, im) = complex_of(&out);
        let err = ((re - v[6]).powi(2) + (im - v[7]).powi(2)).sqrt();
        assert!(err <= 1e-12 * (v[6].hypot(v[7])).max(1.0), "{line}: {re} {im}");
    }
}
