use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbm-am")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sbm-am-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

#[test]
fn verify_theory_refuses_large_delta() {
    let out = bin(&["verify-theory", "--delta", "9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("refuses delta 9"));
}

#[test]
fn tampered_state_fails_the_residual_check() {
    let dir = scratch("tamper");
    let d = dir.to_str().unwrap();
    let args = ["verify-theory", "--alpha", "2", "--beta", "2", "--trials", "2000", "--out", d];
    let clean = bin(&args);
    assert_eq!(clean.status.code(), Some(0), "{}", String::from_utf8_lossy(&clean.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("verify_theory.json")).unwrap()).unwrap();
    let names: Vec<&str> = report.as_array().unwrap().iter().map(|r| r["check_name"].as_str().unwrap()).collect();
    assert!(names.contains(&"flat_white_residual") && names.contains(&"branching_mc"));

    let mut tampered = args.to_vec();
    tampered.push("--tamper");
    let bad = bin(&tampered);
    assert_eq!(bad.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("verify_theory.json")).unwrap()).unwrap();
    let residual = report.as_array().unwrap().iter().find(|r| r["check_name"] == "flat_white_residual").unwrap();
    assert_eq!(residual["pass"], false);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn outputs_are_identical_across_worker_counts() {
    let mut files = Vec::new();
    for workers in ["1", "3"] {
        let dir = scratch(&format!("det{workers}"));
        let d = dir.to_str().unwrap();
        let out = bin(&["bad-vertices", "--n", "3000", "--runs", "12", "--workers", workers, "--out", d]);
        assert!(out.status.success());
        files.push((fs::read(dir.join("bad_vertices.csv")).unwrap(), fs::read(dir.join("bad_vertices_summary.json")).unwrap()));
        fs::remove_dir_all(dir).unwrap();
    }
    assert_eq!(files[0], files[1]);
    let text = String::from_utf8(files[0].0.clone()).unwrap();
    assert!(text.starts_with("# sbm-am "));
    assert_eq!(text.lines().nth(1), Some("seed,bad,mono_edges,epochs"));
    assert_eq!(text.lines().count(), 14);
    assert!(!text.contains('\r'));
}

#[test]
fn gen_and_run_am_write_documented_formats() {
    let dir = scratch("gen");
    let d = dir.to_str().unwrap();
    assert!(bin(&["gen", "--n", "300", "--seeds", "5", "--out", d]).status.success());
    let graph = fs::read_to_string(dir.join("graph_n300_seed5.txt")).unwrap();
    assert_eq!(graph.lines().next(), Some("300 4.03 6 5"));
    assert!(graph.lines().skip(1).take(300).all(|l| ["1", "2", "3"].contains(&l)));

    assert!(bin(&["run-am", "--n", "500", "--seeds", "0..3", "--trace", "--out", d]).status.success());
    let runs = fs::read_to_string(dir.join("runs.jsonl")).unwrap();
    assert_eq!(runs.lines().count(), 3);
    let first: serde_json::Value = serde_json::from_str(runs.lines().next().unwrap()).unwrap();
    for key in ["seed", "n", "d", "beta", "alpha", "mode", "bad", "mono_edges", "epochs", "agreement"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    let trace = fs::read_to_string(dir.join("trace_seed1.csv")).unwrap();
    assert_eq!(trace.lines().nth(1), Some("t,lambda_emp,gamma_emp,live,bad_so_far,two_lists,three_lists"));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn ode_and_dmax_scan_write_csvs() {
    let dir = scratch("ode");
    let d = dir.to_str().unwrap();
    assert!(bin(&["ode", "--d", "4.03", "--alpha", "15", "--out", d]).status.success());
    let traj = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().nth(1), Some("t,lambda,gamma,u_sum,w_sum,u1,w1"));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("assumptions.json")).unwrap()).unwrap();
    assert!(report["t_star"].as_f64().unwrap() > 0.0);

    assert!(bin(&["dmax-scan", "--alpha", "14", "--out", d]).status.success());
    let csv = fs::read_to_string(dir.join("dmax.csv")).unwrap();
    let row: Vec<f64> = csv.lines().nth(2).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], 14.0);
    assert!((row[1] - 4.03).abs() <= 0.01);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn config_file_supplies_values_and_unknown_keys_fail() {
    let dir = scratch("config");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("c.json");
    fs::write(&cfg, r#"{"n": [400], "seeds": [2, 1]}"#).unwrap();
    let d = dir.to_str().unwrap();
    assert!(bin(&["bad-vertices", "--config", cfg.to_str().unwrap(), "--out", d]).status.success());
    let csv = fs::read_to_string(dir.join("bad_vertices.csv")).unwrap();
    let seeds: Vec<&str> = csv.lines().skip(2).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(seeds, ["1", "2"]);
    fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    assert_eq!(bin(&["bad-vertices", "--config", cfg.to_str().unwrap(), "--out", d]).status.code(), Some(2));
    fs::remove_dir_all(dir).unwrap();
}
