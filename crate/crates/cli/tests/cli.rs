//! End-to-end tests of the `smilecal` binary.

use assert_cmd::Command;
use predicates::prelude::*;
use std::fs;

fn smilecal() -> Command {
    Command::cargo_bin("smilecal").unwrap()
}

fn sample_csv() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample_quotes.csv")
}

const NOW: &str = "2024-01-01T00:00:00Z";

#[test]
fn calibrate_happy_path_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("smile");
    smilecal()
        .args(["calibrate", "--input"])
        .arg(sample_csv())
        .arg("--output")
        .arg(&prefix)
        .args(["--now", NOW])
        .assert()
        .success()
        .stdout(predicate::str::contains("fitted SVI"));

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(prefix.with_extension("json")).unwrap()).unwrap();
    assert_eq!(json["converged"], true);
    assert_eq!(json["method"], "data_augmentation");
    // the sample file has a missing-bid put wing: repairs must be reported
    assert!(json["repaired_count"].as_u64().unwrap() >= 5);

    let csv = fs::read_to_string(prefix.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,bid_iv,ask_iv,mid_iv,anchor_iv,fitted_iv"
    );
    assert_eq!(lines.count(), 25);
}

#[test]
fn calibrate_json_flag_prints_machine_readable_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = smilecal()
        .args(["calibrate", "--input"])
        .arg(sample_csv())
        .arg("--output")
        .arg(dir.path().join("s"))
        .args(["--now", NOW, "--json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(json["report"]["chi_star"]["b"].as_f64().unwrap() > 0.0);
    assert!(json["report"]["butterfly_ok"].as_bool().unwrap());
}

#[test]
fn calibrate_augmentation_fit_sits_above_mid_fit_in_missing_bid_wing() {
    let dir = tempfile::tempdir().unwrap();
    let mut fits = Vec::new();
    for method in ["mid", "aug"] {
        let prefix = dir.path().join(method);
        smilecal()
            .args(["calibrate", "--input"])
            .arg(sample_csv())
            .arg("--output")
            .arg(&prefix)
            .args(["--method", method, "--now", NOW])
            .assert()
            .success();
        let csv = fs::read_to_string(prefix.with_extension("csv")).unwrap();
        let rows: Vec<(f64, f64)> = csv
            .lines()
            .skip(1)
            .map(|l| {
                let cols: Vec<&str> = l.split(',').collect();
                (cols[0].parse().unwrap(), cols[5].parse().unwrap())
            })
            .collect();
        fits.push(rows);
    }
    // the deep put wing (k < -0.55) has no bids in the sample file; the mid of
    // the repaired one-tick bid under-states the volatility there
    let wing: Vec<usize> = fits[0]
        .iter()
        .enumerate()
        .filter(|(_, r)| r.0 < -0.55)
        .map(|(i, _)| i)
        .collect();
    assert!(wing.len() >= 3);
    for &i in &wing {
        let (k, mid_fit) = fits[0][i];
        let (_, aug_fit) = fits[1][i];
        assert!(
            aug_fit > mid_fit,
            "augmentation fit {aug_fit} not above mid fit {mid_fit} at k={k}"
        );
    }
}

#[test]
fn calibrate_missing_input_is_input_error() {
    smilecal()
        .args(["calibrate", "--input", "/nonexistent/quotes.csv"])
        .assert()
        .code(1)
        .stderr(predicate::str::contains("cannot open"));
}

#[test]
fn calibrate_parse_error_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(
        &bad,
        "type,strike,expiry,bid_ticks,ask_ticks,tick_size,spot,future,discount\n\
         call,30000,2024-06-28T08:00:00Z,,120,0.0005,30000,30100,0.999\n\
         call,oops,2024-06-28T08:00:00Z,,120,0.0005,30000,30100,0.999\n",
    )
    .unwrap();
    smilecal()
        .args(["calibrate", "--input"])
        .arg(&bad)
        .arg("--output")
        .arg(dir.path().join("s"))
        .assert()
        .code(1)
        .stderr(predicate::str::contains("line 3"));
}

#[test]
fn calibrate_all_asks_missing_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("no_asks.csv");
    fs::write(
        &bad,
        "type,strike,expiry,bid_ticks,ask_ticks,tick_size,spot,future,discount\n\
         call,30000,2024-06-28T08:00:00Z,10,,0.0005,30000,30100,0.999\n\
         call,32000,2024-06-28T08:00:00Z,5,,0.0005,30000,30100,0.999\n",
    )
    .unwrap();
    smilecal()
        .args(["calibrate", "--input"])
        .arg(&bad)
        .arg("--output")
        .arg(dir.path().join("s"))
        .args(["--now", NOW])
        .assert()
        .code(1)
        .stderr(predicate::str::contains("insufficient data"));
}

#[test]
fn simulate_is_deterministic_and_reports_both_methods() {
    let run = || {
        smilecal()
            .args([
                "simulate",
                "--use-case",
                "3",
                "--scenarios",
                "30",
                "--seed",
                "7",
            ])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "same seed must give identical output");
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("mid"));
    assert!(text.contains("data augmentation"));
    assert!(text.contains("L1 reduction"));
}

#[test]
fn simulate_json_output_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = smilecal()
        .args([
            "simulate",
            "--use-case",
            "1",
            "--scenarios",
            "30",
            "--seed",
            "3",
            "--json",
            "--output",
        ])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout_json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let file_json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(stdout_json, file_json);
    assert_eq!(stdout_json["n_scenarios"], 30);
    assert_eq!(stdout_json["seed"], 3);
    assert!(stdout_json["mid"]["l1_mean"].as_f64().unwrap() > 0.0);
    assert!(
        stdout_json["augmentation"]["l1_mean"].as_f64().unwrap()
            < stdout_json["mid"]["l1_mean"].as_f64().unwrap()
    );
}

#[test]
fn simulate_refuses_few_scenarios_and_bad_use_case() {
    smilecal()
        .args(["simulate", "--use-case", "3", "--scenarios", "10"])
        .assert()
        .code(1)
        .stderr(predicate::str::contains("at least 30"));
    smilecal()
        .args(["simulate", "--use-case", "4", "--scenarios", "30"])
        .assert()
        .code(1);
}

#[test]
fn iv_inverts_known_price() {
    // ATM price for sigma = 0.5, tau = 0.25: 2*N(0.125) - 1
    let out = smilecal()
        .args(["iv", "--price", "0.09947644937676548", "--strike", "1", "--tau", "0.25"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let iv: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((iv - 0.5).abs() < 1e-8);
}

#[test]
fn iv_rejects_price_outside_bounds() {
    smilecal()
        .args(["iv", "--price", "1.5", "--strike", "1", "--tau", "0.25"])
        .assert()
        .code(1)
        .stderr(predicate::str::contains("upper arbitrage bound"));
}

#[test]
fn diagnose_quarter_year_condition_met() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("condition.csv");
    smilecal()
        .args(["diagnose", "--tau", "0.25", "--output"])
        .arg(&csv_path)
        .assert()
        .success()
        .stdout(predicate::str::contains("condition met"));
    let csv = fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("k,sigma_bar,rho\n"));
    assert_eq!(csv.lines().count(), 82);
}

#[test]
fn diagnose_two_week_expiry_prints_min_rho() {
    smilecal()
        .args(["diagnose", "--tau", "0.038461538"])
        .assert()
        .success()
        .stdout(predicate::str::contains("min |rho|"));
}

#[test]
fn diagnose_bad_tick_is_input_error() {
    smilecal()
        .args(["diagnose", "--tau", "0.25", "--tick=-1"])
        .assert()
        .code(1)
        .stderr(predicate::str::contains("invalid input"));
    smilecal()
        .args(["diagnose", "--tau", "0.25", "--tick", "0"])
        .assert()
        .code(1);
}

#[test]
fn unknown_flag_exits_one() {
    smilecal().arg("--bogus").assert().code(1);
}
