use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_restriction-lab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("file written")).expect("valid json")
}

#[test]
fn extend_circle_origin_is_two_pi() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["extend", "--surface", "circle", "--box", "4", "--res", "9"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("out/extend.json"));
    let origin = v["result"]["abs_at_origin"].as_f64().unwrap();
    assert!((origin - std::f64::consts::TAU).abs() < 1e-6, "{origin}");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    let csv = std::fs::read_to_string(dir.path().join("out/extend.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x_0,x_1,re,im,abs"));
    assert_eq!(csv.lines().count(), 1 + 81);
}

#[test]
fn knapp_slope_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["knapp", "--k", "2", "--pprime", "6", "--q", "2", "--eps", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("out/knapp.json"));
    let fitted = v["result"]["fitted"].as_f64().unwrap();
    assert!((fitted - 1.0 / 3.0).abs() < 0.1, "{fitted}");
    let csv = std::fs::read_to_string(dir.path().join("out/knapp.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("lambda,lhs_norm,ratio,log_ratio"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn malformed_config_exits_2_without_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "seed = 1\n[knapp\n").unwrap();
    let out = run(dir.path(), &["--config", "bad.toml", "knapp"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // the bad section belongs to another subcommand; it is still rejected
    std::fs::write(dir.path().join("bad.toml"), "[chain]\nchian = \"sphere\"\n").unwrap();
    let out = run(dir.path(), &["--config", "bad.toml", "ode"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("chian"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn bad_flag_value_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["chain", "--chain", "torus"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["extend", "--surface", "klein"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn config_values_apply_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "seed = 7\n[norm]\nrandom = 50\nalpha = 3.0\nbeta = \"inf\"\n").unwrap();
    let out = run(dir.path(), &["--config", "c.toml", "norm", "--alpha", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("out/norm.json"));
    assert_eq!(v["seed"], 7);
    assert_eq!(v["result"]["alpha"], 4.0);
    assert_eq!(v["result"]["beta"], "inf");
    assert_eq!(v["result"]["count"], 50);
}

#[test]
fn acceptance_subset_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut seen = Vec::new();
    for _ in 0..2 {
        let out = run(dir.path(), &["acceptance", "--criteria", "3,5", "--format", "json"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        seen.push(std::fs::read(dir.path().join("out/acceptance.json")).unwrap());
    }
    assert_eq!(seen[0], seen[1]);
    assert!(!dir.path().join("out/acceptance.csv").exists());
    let v: Value = serde_json::from_slice(&seen[0]).unwrap();
    let ids: Vec<u64> = v["result"]["criteria"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, [3, 5, 10]);
}

#[test]
fn seed_changes_hash() {
    let dir = tempfile::tempdir().unwrap();
    let hash = |seed: &str| {
        let out = run(dir.path(), &["--seed", seed, "ode", "--sweep", "5", "--format", "json"]);
        assert!(out.status.success());
        json(&dir.path().join("out/ode.json"))["config_hash"].as_str().unwrap().to_string()
    };
    assert_eq!(hash("1"), hash("1"));
    assert_ne!(hash("1"), hash("2"));
}

#[test]
fn chain_runs_for_every_family() {
    let dir = tempfile::tempdir().unwrap();
    for (chain, extra) in [("sphere", &[][..]), ("parab", &[][..]), ("hyperb", &[][..]), ("finite-type", &["--pprime", "4", "--q", "1.5"][..])] {
        let mut args = vec!["chain", "--chain", chain, "--count", "3", "--format", "json"];
        args.extend_from_slice(extra);
        let out = run(dir.path(), &args);
        assert!(out.status.success(), "{chain}: {}", String::from_utf8_lossy(&out.stderr));
        let v = json(&dir.path().join("out/chain.json"));
        assert_eq!(v["result"]["chain"], chain);
        assert!(v["result"]["violations"].as_array().unwrap().is_empty());
    }
}

#[test]
fn oversized_extension_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["extend", "--surface", "cone", "--box", "6", "--res", "40"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("GiB"));
    assert!(!dir.path().join("out").exists());
}
