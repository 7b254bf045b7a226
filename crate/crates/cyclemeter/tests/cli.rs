//! End-to-end tests of the command-line interface: documented outputs,
//! exit codes, byte-level determinism, and CSV round trips.

use std::path::PathBuf;
use std::process::{Command, Output};

use cyclemeter::cli::parse_csv_table;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cyclemeter"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn cyclemeter")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("cyclemeter-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn h_table_documented_example() {
    let text = stdout(&["h-table", "--weights", "ewens:2", "--n", "3", "--out", "-"]);
    let table = parse_csv_table(&text).unwrap();
    assert_eq!(table.header, vec!["n", "log_h"]);
    let col = table.column("log_h").unwrap();
    let expect = [1.0f64, 2.0, 3.0, 4.0];
    for (got, want) in col.iter().zip(expect.iter()) {
        assert!((got - want.ln()).abs() < 1e-12);
    }
    assert!(table
        .meta
        .iter()
        .any(|(k, v)| k == "weights" && v == "ewens:2"));
}

#[test]
fn expect_documented_example() {
    let text = stdout(&[
        "expect",
        "--weights",
        "uniform",
        "--n",
        "3",
        "--stat",
        "logY",
        "--exact",
    ]);
    let v: f64 = text.trim().parse().unwrap();
    assert!((v - 0.7127776865026759).abs() < 1e-12, "got {v}");
}

#[test]
fn clt_is_byte_identical_across_runs_and_workers() {
    let args_base = [
        "clt",
        "--weights",
        "uniform",
        "--n",
        "300",
        "--samples",
        "5000",
        "--seed",
        "7",
    ];
    let first = stdout(&args_base);
    let second = stdout(&args_base);
    assert_eq!(
        first, second,
        "identical invocations must agree byte-for-byte"
    );

    let w1 = stdout(&[&args_base[..], &["--workers", "1"]].concat());
    let w8 = stdout(&[&args_base[..], &["--workers", "8"]].concat());
    assert_eq!(w1, w8, "worker count must not affect output");
    assert_eq!(first, w1);

    for key in ["ks_distance", "centering", "scale", "\"n\"", "samples"] {
        assert!(first.contains(key), "missing key {key} in {first}");
    }
}

#[test]
fn sample_csv_round_trips() {
    let stats_path = tmp_path("stats.json");
    let csv = stdout(&[
        "sample",
        "--weights",
        "poly:0.5",
        "--n",
        "40",
        "--samples",
        "200",
        "--seed",
        "3",
        "--stat",
        "logY",
        "--out",
        "-",
        "--stats-out",
        stats_path.to_str().unwrap(),
    ]);
    let table = parse_csv_table(&csv).unwrap();
    assert_eq!(table.header, vec!["index", "value"]);
    assert_eq!(table.rows.len(), 200);
    let values = table.column("value").unwrap();
    // re-parse must be exact: 17 significant digits round-trip
    let reprinted = stdout(&[
        "sample",
        "--weights",
        "poly:0.5",
        "--n",
        "40",
        "--samples",
        "200",
        "--seed",
        "3",
        "--stat",
        "logY",
        "--out",
        "-",
    ]);
    let again = parse_csv_table(&reprinted)
        .unwrap()
        .column("value")
        .unwrap();
    assert_eq!(values, again);

    let stats: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&stats_path).unwrap()).unwrap();
    assert_eq!(stats["count"], 200);
    let mean = stats["mean"].as_f64().unwrap();
    let by_hand = values.iter().sum::<f64>() / 200.0;
    assert!((mean - by_hand).abs() < 1e-9);
    std::fs::remove_file(&stats_path).ok();
}

#[test]
fn dist_matches_enumeration_example() {
    let text = stdout(&[
        "dist",
        "--weights",
        "uniform",
        "--n",
        "4",
        "--stat",
        "delta",
    ]);
    let table = parse_csv_table(&text).unwrap();
    let values = table.column("value").unwrap();
    let probs = table.column("probability").unwrap();
    assert_eq!(values.len(), 2);
    assert_eq!(values[0], 0.0);
    assert!((probs[0] - 0.875).abs() < 1e-12);
    assert!((values[1] - 2f64.ln()).abs() < 1e-12);
    assert!((probs[1] - 0.125).abs() < 1e-12);
}

#[test]
fn help_covers_every_subcommand() {
    let top = stdout(&["--help"]);
    for sub in [
        "h-table", "sample", "expect", "dist", "mgf", "dnk", "clt", "llt", "ldp", "dev", "elogo",
        "psi", "compare",
    ] {
        assert!(top.contains(sub), "top-level help lacks {sub}");
        let sub_help = stdout(&[sub, "--help"]);
        assert!(sub_help.contains("--out") || sub == "expect", "{sub} help");
    }
}

#[test]
fn exit_code_usage_error() {
    let out = run(&["expect", "--weights", "nosuch:1", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
    // clap-level parse failures exit 2 as well
    let out = run(&["definitely-not-a-subcommand"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_code_capacity_error() {
    let out = run(&["h-table", "--weights", "uniform", "--n", "99999999"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&[
        "dist",
        "--weights",
        "uniform",
        "--n",
        "100",
        "--stat",
        "logY",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn expect_mc_honors_truncation() {
    // the bn-truncated MC mean must match the exact truncated value, not
    // the untruncated one
    let text = stdout(&[
        "expect",
        "--weights",
        "uniform",
        "--n",
        "100",
        "--stat",
        "logY",
        "--trunc",
        "bn",
        "--exact",
    ]);
    let exact_t: f64 = text.trim().parse().unwrap();
    let text = stdout(&[
        "expect",
        "--weights",
        "uniform",
        "--n",
        "100",
        "--stat",
        "logY",
        "--trunc",
        "bn",
        "--mc",
        "--samples",
        "40000",
        "--seed",
        "6",
    ]);
    let mc_t: f64 = text.trim().parse().unwrap();
    assert!((mc_t - exact_t).abs() < 0.1, "{mc_t} vs {exact_t}");

    let text = stdout(&[
        "expect",
        "--weights",
        "uniform",
        "--n",
        "100",
        "--stat",
        "logY",
        "--exact",
    ]);
    let exact_full: f64 = text.trim().parse().unwrap();
    assert!(exact_t < exact_full);

    let out = run(&[
        "expect",
        "--weights",
        "uniform",
        "--n",
        "20",
        "--stat",
        "logY",
        "--trunc",
        "7",
        "--mc",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_code_numeric_range_error() {
    let out = run(&["mgf", "--weights", "poly:1", "--n", "200", "--s", "150"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn zeros_env_override() {
    let zeros_path = tmp_path("zeros.txt");
    std::fs::write(&zeros_path, "# one zero only\n14.134725141734694\n").unwrap();
    let out = bin()
        .args(["psi", "--x", "100"])
        .env("CYCLEMETER_ZEROS", &zeros_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let table = parse_csv_table(&text).unwrap();
    assert!(table.meta.iter().any(|(k, v)| k == "zeros" && v == "1"));
    std::fs::remove_file(&zeros_path).ok();
}

#[test]
fn custom_weight_table_from_file() {
    let path = tmp_path("weights.csv");
    std::fs::write(&path, "m,theta\n1,1.0\n2,1.0\n3,1.0\n#tail=1.0\n").unwrap();
    let spec = format!("custom:{}", path.display());
    let text = stdout(&[
        "expect",
        "--weights",
        &spec,
        "--n",
        "3",
        "--stat",
        "logY",
        "--exact",
    ]);
    let v: f64 = text.trim().parse().unwrap();
    // the table encodes the uniform model
    assert!((v - 0.7127776865026759).abs() < 1e-12);
    std::fs::remove_file(&path).ok();
}

#[test]
fn compare_emits_long_format() {
    let text = stdout(&[
        "compare",
        "--weights",
        "ewens:2",
        "--pair",
        "h-ge",
        "--n-grid",
        "50,100",
    ]);
    let table = parse_csv_table(&text).unwrap();
    assert_eq!(
        table.header,
        vec!["n", "quantity", "exact", "asymptotic", "diff"]
    );
    assert_eq!(table.rows.len(), 2);
    let exact = table.column("exact").unwrap();
    let asym = table.column("asymptotic").unwrap();
    let diff = table.column("diff").unwrap();
    for i in 0..2 {
        assert!((exact[i] - asym[i] - diff[i]).abs() < 1e-12);
    }
}

#[test]
fn dnk_and_elogo_and_ldp_run() {
    let text = stdout(&["dnk", "--weights", "ewens:1", "--n", "60", "--k", "3"]);
    let t = parse_csv_table(&text).unwrap();
    assert_eq!(t.rows.len(), 1);

    let text = stdout(&["elogo", "--weights", "ewens:1", "--n-grid", "50,100"]);
    let t = parse_csv_table(&text).unwrap();
    assert_eq!(t.rows.len(), 2);

    let text = stdout(&[
        "ldp",
        "--weights",
        "ewens:1",
        "--n-grid",
        "100,200",
        "--t=-1,1",
    ]);
    let t = parse_csv_table(&text).unwrap();
    assert_eq!(t.rows.len(), 4);

    let text = stdout(&[
        "llt",
        "--weights",
        "uniform",
        "--n",
        "200",
        "--samples",
        "2000",
        "--seed",
        "1",
        "--bins",
        "2",
    ]);
    let t = parse_csv_table(&text).unwrap();
    assert_eq!(t.rows.len(), 2);

    let text = stdout(&[
        "dev",
        "--weights",
        "uniform",
        "--n",
        "200",
        "--samples",
        "2000",
        "--seed",
        "1",
        "--x",
        "0.5,1",
    ]);
    let t = parse_csv_table(&text).unwrap();
    assert_eq!(t.rows.len(), 2);

    let text = stdout(&["mgf", "--weights", "ewens:1", "--n", "100", "--s", "1"]);
    let t = parse_csv_table(&text).unwrap();
    assert_eq!(t.rows.len(), 1);
}
