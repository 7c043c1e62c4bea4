use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gue-expand"))
        .args(args)
        .env_remove("GUE_EXPAND_THREADS")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn density_table_has_small_residuals() {
    let v = json(&["density", "--n", "10", "--points", "101"]);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["config"]["n"], 10);
    let rows = v["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 101);
    assert!(rows.iter().all(|r| r["residual"].as_f64().unwrap() <= 1e-8));
}

#[test]
fn density_scalar_case_is_standard_normal() {
    let v = json(&["density", "--n", "1", "--points", "3"]);
    for r in v["result"]["rows"].as_array().unwrap() {
        let x = r["x"].as_f64().unwrap();
        let want = (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((r["h"].as_f64().unwrap() - want).abs() < 1e-15);
    }
}

#[test]
fn bad_arguments_exit_two() {
    for args in [
        &["density", "--n", "0"][..],
        &["expand", "--g", "nosuch:1", "--n", "4"],
        &["g2", "--n", "4", "--lambda", "0.5", "--mu", "0+2i"],
        &["validate", "--suite", "nosuch"],
        &["density"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn eta_exact_output() {
    let v = json(&["eta", "--j", "2", "--exact"]);
    assert_eq!(v["result"]["expression"], "21·(λ²−4)^(−9/2) + 105·(λ²−4)^(−11/2)");
    let out = run(&["eta", "--j", "3", "--exact", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for (c, p) in [("1485", "-13/2"), ("18018", "-15/2"), ("50050", "-17/2")] {
        assert!(text.lines().any(|l| l.ends_with(&format!(",{c},{p}"))), "{text}");
    }
}

#[test]
fn g2_fields_populated() {
    let v = json(&["g2", "--n", "16", "--lambda", "0+3i", "--mu", "0+2i", "--k", "1"]);
    let r = &v["result"];
    assert!(r["exact"].is_string());
    assert_eq!(r["partial_sums"].as_array().unwrap().len(), 2);
    assert_eq!(r["remainders"].as_array().unwrap().len(), 2);
    let slopes = r["slopes"].as_array().unwrap();
    assert!(slopes[0]["slope"].as_f64().unwrap() < -1.5);
    assert!(slopes[1]["slope"].as_f64().unwrap() < -3.5);
}

#[test]
fn validate_golden_exits_zero() {
    let out = run(&["validate", "--suite", "golden", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[PASS]"));
}

#[test]
fn output_is_deterministic() {
    let args = ["mc", "--n", "4", "--f", "poly:0,0,1", "--draws", "3000", "--seed", "5", "--format", "csv"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_gue-expand"))
        .args(args)
        .env("GUE_EXPAND_THREADS", "1")
        .output()
        .unwrap();
    // The thread count shows up in the header only.
    let body = |o: &[u8]| String::from_utf8_lossy(o).lines().skip(3).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&a.stdout), body(&c.stdout));
}

#[test]
fn csv_uses_round_trip_digits() {
    let out = run(&["cov", "--f", "poly:0,1", "--n", "4", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().last().unwrap();
    let re: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((re - 1.0).abs() < 1e-12, "{row}");
    assert_eq!(row.split(',').nth(1).unwrap().split('e').next().unwrap().len(), 18);
}

#[test]
fn config_file_merges_under_flags() {
    let dir = std::env::temp_dir().join(format!("gue-expand-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.conf");
    std::fs::write(&cfg, "# density settings\nn = 3\npoints = 5\nxmin = -1\n").unwrap();
    let path = cfg.to_str().unwrap();
    let v = json(&["density", "--config", path]);
    assert_eq!(v["config"]["n"], 3);
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 5);
    let v = json(&["density", "--config", path, "--points", "7"]);
    assert_eq!(v["config"]["points"], 7);
    assert_eq!(v["config"]["xmin"], -1.0);
    let out_file = dir.join("out.json");
    let out = run(&["eta", "--j", "1", "--out", out_file.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_file).unwrap()).unwrap();
    assert_eq!(v["command"], "eta");
    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(run(&["density", "--n", "2", "--config", path]).status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn expand_reports_ladder_slopes() {
    let v = json(&["expand", "--g", "cos", "--k", "1", "--ladder", "8,16,32,64"]);
    let s = v["result"]["slopes"].as_array().unwrap();
    assert!(s[0]["slope"].as_f64().unwrap() < -1.5);
    assert!(s[1]["slope"].as_f64().unwrap() < -3.5);
    assert_eq!(v["result"]["reports"].as_array().unwrap().len(), 4);
}
