use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn grmat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grmat")).args(args).output().expect("run grmat")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("grmat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json_report(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--out", "-"]);
    let out = grmat(&all);
    let v: Value = serde_json::from_slice(&out.stdout).expect("json on stdout");
    (out.status.code().unwrap(), v)
}

fn without_runtime(mut v: Value) -> Value {
    if let Some(o) = v["report"].as_object_mut() {
        o.remove("runtime_ms");
    }
    v
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(grmat(&["tv", "--family", "gl", "--n", "3", "--k", "2"]).status.code(), Some(2));
    assert_eq!(grmat(&["tv", "--family", "nope", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(grmat(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(grmat(&["tv", "--n", "3", "--d", "3", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(grmat(&["single-trace", "--r", "3", "--seed", "1"]).status.code(), Some(2));
}

#[test]
fn passing_and_failing_runs() {
    let ok = grmat(&["congruence", "--family", "sp", "--n", "2", "--p", "3", "--k", "3", "--samples", "100", "--seed", "1"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("0 violations"));
    // tr(M) on SL_2(Z/9) is far from uniform; a tight threshold must fail
    let bad = grmat(&["tv", "--family", "sl", "--n", "2", "--k", "2", "--samples", "2000", "--seed", "3", "--tv-threshold", "0.01"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn json_envelope_and_round_trip() {
    let args = ["tv", "--family", "gl", "--n", "3", "--k", "2", "--samples", "3000", "--seed", "11"];
    let (code, first) = json_report(&args);
    assert_eq!(code, 0);
    assert_eq!(first["schema_version"], 1);
    assert_eq!(first["command"], "tv");
    let cfg = &first["report"]["config"];
    let path = scratch("roundtrip.cfg");
    let text = format!(
        "family: {}\nn: {}\np: {}\nm: {}\nk: {}\nd: {}\nsamples: {}\nseed: {}\nmode: {}\n",
        cfg["family"].as_str().unwrap(),
        cfg["n"],
        cfg["p"],
        cfg["m"],
        cfg["k"],
        cfg["shape"]["positive"]["d"],
        cfg["samples"],
        cfg["seed"],
        cfg["mode"].as_str().unwrap()
    );
    std::fs::write(&path, text).unwrap();
    let (_, second) = json_report(&["tv", "--config", path.to_str().unwrap(), "--workers", "2"]);
    assert_eq!(without_runtime(first), without_runtime(second));
}

#[test]
fn flags_override_config_file() {
    let path = scratch("override.cfg");
    std::fs::write(&path, "# comment\nfamily: sl\nn: 2\nsamples: 50\nseed: 4\n").unwrap();
    let (_, v) = json_report(&["sample", "--config", path.to_str().unwrap(), "--samples", "3"]);
    assert_eq!(v["report"]["config"]["family"], "sl");
    assert_eq!(v["report"]["samples"].as_array().unwrap().len(), 3);
    std::fs::write(&path, "not a pair\n").unwrap();
    assert_eq!(grmat(&["sample", "--config", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn csv_has_header() {
    let out = grmat(&["enumerate", "--family", "gl", "--n", "2", "--out", "-", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("datum,numerator,denominator"));
    assert_eq!(lines.count(), 8);
}

#[test]
fn exact_subcommands() {
    for args in [
        &["onestep", "--family", "sp", "--n", "1", "--k", "2", "--mode", "exact"][..],
        &["fulman", "--family", "u", "--n", "2"],
        &["image-check", "--family", "sl", "--n", "2", "--mode", "exact"],
        &["hayes", "--l", "1", "--h", "1*x^2"],
        &["single-trace", "--family", "gl", "--n", "2", "--k", "2", "--r", "2", "--mode", "exact"],
        &["enumerate", "--family", "sl", "--n", "2", "--chi-square", "--samples", "2400", "--seed", "5"],
    ] {
        assert_eq!(grmat(args).status.code(), Some(0), "{args:?}");
    }
}
