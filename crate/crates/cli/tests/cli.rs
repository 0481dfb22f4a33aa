use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn commlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commlab"))
        .args(args)
        .env_remove("COMMLAB_ENUM_CAP")
        .output()
        .expect("binary runs")
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("every line is JSON"))
        .collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("commlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn verify_is_healthy() {
    let out = commlab(&["verify", "--seed", "42"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let recs = records(&out);
    assert_eq!(recs.len(), 12);
    assert!(recs.iter().all(|r| r["passed"] == true));
}

#[test]
fn binomial_shift_probe() {
    let out = commlab(&["probe", "binomial-shift", "--t", "100"]);
    assert!(out.status.success());
    let r = &records(&out)[0];
    let v = r["value"].as_f64().unwrap();
    assert!((v - 0.0795892373871787).abs() < 1e-12, "{v}");
    assert_eq!(r["command"], "probe binomial-shift");
    assert_eq!(r["seed"], 42);
    assert!(r["build"].as_str().is_some_and(|b| !b.is_empty()));
    assert_eq!(r["config"]["args"]["t"], 100);
}

#[test]
fn same_argv_same_bytes() {
    let args = [
        "sumequal",
        "fingerprint",
        "--k",
        "3",
        "--modulus",
        "5",
        "--trials",
        "2000",
        "--seed",
        "9",
    ];
    let a = commlab(&args);
    let b = commlab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = commlab(&[
        "sumequal",
        "fingerprint",
        "--k",
        "3",
        "--modulus",
        "5",
        "--trials",
        "2000",
        "--seed",
        "10",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn timing_is_opt_in() {
    let plain = records(&commlab(&["simulate", "amplify"]));
    assert!(plain[0].get("elapsed_s").is_none());
    let timed = records(&commlab(&["simulate", "amplify", "--timing"]));
    assert!(timed[0]["elapsed_s"].as_f64().is_some());
    assert_eq!(plain[0]["t"], 57);
    assert_eq!(plain[0]["copies"], 115);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(commlab(&["--no-such-flag"]).status.code(), Some(2));
    assert_eq!(commlab(&["frobnicate"]).status.code(), Some(2));
    let out = commlab(&["ghse", "bias", "--n-double-prime", "8"]);
    assert_eq!(out.status.code(), Some(2));
    let reason: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(reason["error"], "parameter");
}

#[test]
fn refusals_exit_three_with_reason() {
    let out = Command::new(env!("CARGO_BIN_EXE_commlab"))
        .args(["sumequal", "exact", "--k", "4", "--modulus", "7"])
        .env("COMMLAB_ENUM_CAP", "100")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let reason: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(reason["error"], "refused");
    assert!(reason["reason"].as_str().unwrap().contains("cap"));
}

#[test]
fn bad_enum_cap_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_commlab"))
        .args(["verify"])
        .env("COMMLAB_ENUM_CAP", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn l0_round_trip_through_a_file() {
    let path = scratch("stream.txt");
    let p = path.to_str().unwrap();
    let gen = commlab(&[
        "l0",
        "generate",
        "--stream",
        p,
        "--dimension",
        "3000",
        "--updates",
        "8000",
        "--l0",
        "700",
    ]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    let exact = records(&commlab(&["l0", "exact", "--stream", p]));
    assert_eq!(exact[0]["exact"], 700);
    let est = commlab(&[
        "l0",
        "estimate",
        "--stream",
        p,
        "--epsilon",
        "0.1",
        "--delta",
        "0.33",
        "--seed",
        "7",
    ]);
    assert!(est.status.success());
    let r = &records(&est)[0];
    assert_eq!(r["exact"], 700);
    assert!(r["space_bits"].as_u64().unwrap() > 0);
    let e = r["estimate"].as_f64().unwrap();
    assert!((e - 700.0).abs() <= 70.0, "{e}");
}

#[test]
fn non_strict_stream_file_is_rejected() {
    let path = scratch("bad.txt");
    std::fs::write(&path, "5 3 strict\n1 1\n2 -1\n").unwrap();
    let out = commlab(&["l0", "exact", "--stream", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let reason: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(reason["error"], "strict-violation");
}

#[test]
fn csv_has_one_header_and_a_row_per_record() {
    let out = commlab(&["probe", "majority", "--t", "4", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "bound"));
    assert_eq!(reader.records().count(), 5);
}

#[test]
fn out_flag_writes_a_file() {
    let path = scratch("bias.jsonl");
    let out = commlab(&["ghse", "bias", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let r: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(r["exact_bias"], "163/256");
}

#[test]
fn automaton_from_a_function_file() {
    let path = scratch("f.json");
    std::fs::write(
        &path,
        r#"{"builtin": "sum-equal-mod-m", "arity": 3, "modulus": 4, "target": 1}"#,
    )
    .unwrap();
    let out = commlab(&["simulate", "automaton", "--function", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &records(&out)[0];
    assert_eq!(r["mismatches"], 0);
    assert_eq!(r["inputs"], 64);
    assert!(r["memory_bits"].as_u64() <= r["memory_bound"].as_u64());
}

#[test]
fn two_point_and_sd_files() {
    let a = scratch("a.json");
    let b = scratch("b.json");
    std::fs::write(&a, r#"{"support": [0, 1, 2], "probs": ["1/4", "1/4", "1/2"]}"#).unwrap();
    std::fs::write(&b, r#"{"support": [0, 1, 2], "probs": ["1/3", "1/3", "1/3"]}"#).unwrap();
    let out = commlab(&["probe", "two-point", "--dist", a.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let parts = records(&out);
    assert!(parts.iter().all(|r| r["recomposes_exactly"] == true));
    let out = commlab(&["probe", "sd", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap()]);
    assert_eq!(records(&out)[0]["sd_exact"], "1/6");
}
