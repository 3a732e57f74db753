use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn dast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dast"))
        .args(args)
        .output()
        .expect("dast runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_csv(dir: &TempDir, name: &str, header: &str, values: &[f64]) -> PathBuf {
    let path = dir.path().join(name);
    let mut text = format!("{header}\n");
    for v in values {
        text.push_str(&format!("{v}\n"));
    }
    std::fs::write(&path, text).unwrap();
    path
}

/// Deterministic heavy-tailed values: Pareto quantiles visited in a scrambled order.
fn pareto_values(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (n as f64 + 1.0) / ((i * 7919) % n + 1) as f64)
        .collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn analyze_is_deterministic_and_replays_its_config() {
    let dir = TempDir::new().unwrap();
    let csv = write_csv(&dir, "x.csv", "x", &pareto_values(600));
    let args = [
        "analyze",
        "--input",
        p(&csv),
        "--column",
        "x",
        "--k",
        "150",
        "--kstar",
        "150",
        "--seed",
        "3",
    ];
    let first = stdout(&dast(&args));
    assert_eq!(first, stdout(&dast(&args)));

    let report: Value = serde_json::from_str(&first).unwrap();
    let mut config = String::from("# replayed\n");
    for (key, value) in report["config"].as_object().unwrap() {
        config.push_str(&format!("{key}={}\n", value.as_str().unwrap()));
    }
    let cfg_path = dir.path().join("replay.cfg");
    std::fs::write(&cfg_path, config).unwrap();
    assert_eq!(first, stdout(&dast(&["analyze", "--config", p(&cfg_path)])));
}

#[test]
fn analyze_reports_both_tails_with_rows() {
    let dir = TempDir::new().unwrap();
    let mut values = pareto_values(500);
    values[17] = 1e6;
    let csv = write_csv(&dir, "x.csv", "x", &values);
    let out = stdout(&dast(&[
        "analyze",
        "--input",
        p(&csv),
        "--column",
        "1",
        "--k",
        "150",
        "--kstar",
        "150",
    ]));
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["input"]["n"], 500);
    assert_eq!(r["upper"]["status"], "ok");
    assert_eq!(r["lower"]["status"], "ok");
    assert_eq!(r["lower"]["transform"]["kind"], "transformed_reciprocal");
    let outliers = r["upper"]["outliers"].as_array().unwrap();
    assert!(
        outliers.iter().any(|o| o["row"] == 17 && o["value"] == 1e6),
        "{outliers:?}"
    );
    assert_eq!(
        r["upper"]["outlier_count"].as_u64().unwrap() as usize,
        outliers.len()
    );
}

#[test]
fn lower_tail_of_signed_data_is_negated() {
    let dir = TempDir::new().unwrap();
    let mut values: Vec<f64> = pareto_values(400).iter().map(|x| -x).collect();
    values[9] = 2.0;
    let csv = write_csv(&dir, "x.csv", "x", &values);
    let out = stdout(&dast(&[
        "analyze",
        "--input",
        p(&csv),
        "--column",
        "x",
        "--k",
        "100",
        "--kstar",
        "100",
        "--tail",
        "lower",
    ]));
    let r: Value = serde_json::from_str(&out).unwrap();
    assert!(r["upper"].is_null());
    assert_eq!(r["lower"]["transform"]["kind"], "transformed_negated");
    assert_eq!(r["config"]["tail"], "lower");
}

#[test]
fn exit_codes_follow_error_kinds() {
    let dir = TempDir::new().unwrap();
    let missing = dast(&[
        "analyze",
        "--input",
        "/no/such/file.csv",
        "--column",
        "x",
        "--k",
        "5",
        "--kstar",
        "5",
    ]);
    assert_eq!(missing.status.code(), Some(2));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x\n1\n2\nthree\n4\n").unwrap();
    let out = dast(&[
        "analyze",
        "--input",
        p(&bad),
        "--column",
        "x",
        "--k",
        "2",
        "--kstar",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "bogus=1\n").unwrap();
    assert_eq!(
        dast(&["analyze", "--config", p(&cfg)]).status.code(),
        Some(3)
    );
    assert_eq!(dast(&["analyze", "--k", "nope"]).status.code(), Some(3));

    // no positive upper tail to work with
    let negative: Vec<f64> = pareto_values(200).iter().map(|x| -x).collect();
    let csv = write_csv(&dir, "neg.csv", "x", &negative);
    let out = dast(&[
        "analyze",
        "--input",
        p(&csv),
        "--column",
        "x",
        "--k",
        "50",
        "--kstar",
        "50",
        "--tail",
        "upper",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["upper"]["status"], "error");
}

#[test]
fn qqplot_row_counts() {
    let dir = TempDir::new().unwrap();
    let csv = write_csv(&dir, "x.csv", "x", &[1.0, 2.0, 4.0, 8.0]);
    let rows = |kind: &str| {
        let out = stdout(&dast(&[
            "qqplot",
            "--input",
            p(&csv),
            "--column",
            "x",
            "--kind",
            kind,
            "--dither",
            "0",
        ]));
        out.lines().count() - 1
    };
    assert_eq!(rows("pareto"), 4);
    assert_eq!(rows("exponential"), 4);
    assert_eq!(rows("generalized"), 3);

    let svg = stdout(&dast(&[
        "qqplot",
        "--input",
        p(&csv),
        "--column",
        "x",
        "--kind",
        "pareto",
        "--k",
        "3",
        "--format",
        "svg",
    ]));
    assert!(svg.starts_with("<svg") && svg.contains("<line"));
}

#[test]
fn diagnostic_emits_one_block_per_k() {
    let dir = TempDir::new().unwrap();
    let csv = write_csv(&dir, "x.csv", "x", &pareto_values(500));
    let out = stdout(&dast(&[
        "diagnostic",
        "--input",
        p(&csv),
        "--column",
        "x",
        "--k",
        "100,200",
        "--k0max",
        "9",
    ]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("k,x,y"));
    let ks: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ks.len(), 20);
    assert!(ks[..10].iter().all(|k| *k == "100") && ks[10..].iter().all(|k| *k == "200"));
}

#[test]
fn boxplot_csv_and_svg() {
    let dir = TempDir::new().unwrap();
    let mut values = pareto_values(300);
    values[0] = 1e5;
    let csv = write_csv(&dir, "x.csv", "x", &values);
    let base = [
        "boxplot",
        "--input",
        p(&csv),
        "--column",
        "x",
        "--k",
        "100",
        "--kstar",
        "100",
    ];
    let out = stdout(&dast(&base));
    assert!(out.starts_with("element,value\nwhisker_low,"));
    assert!(out.lines().any(|l| l == "outlier_high,100000"), "{out}");
    let svg = stdout(&dast(&[&base[..], &["--format", "svg"]].concat()));
    assert!(svg.starts_with("<svg"));
}

#[test]
fn simulate_rows_and_columns() {
    let out = stdout(&dast(&[
        "simulate",
        "--dist",
        "pareto",
        "--params",
        "1",
        "--n",
        "300",
        "--k",
        "80",
        "--kstar",
        "80,100",
        "--reps",
        "1",
        "--xi-known",
    ]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines[0],
        "distribution,k,k_star,k0_star,intensity,reps,type1_rate,mean_k0,sd_k0,failures"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("pareto(1),80,80,30,,1,"));
    // one replication has no spread
    assert!(lines[1].contains(",NaN,") || lines[1].split(',').nth(8) == Some("0"));
}

#[test]
fn kopt_appends_argmin_row() {
    let out = stdout(&dast(&[
        "kopt",
        "--dist",
        "burr",
        "--params",
        "1,0.5,4",
        "--n",
        "500",
        "--grid",
        "100:300:100",
        "--reps",
        "40",
    ]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "row,k,variance,failures");
    assert_eq!(lines.len(), 5);
    assert!(lines[1..4].iter().all(|l| l.starts_with("cell,")));
    let best = lines[4].split(',').nth(1).unwrap();
    assert!(lines[4].starts_with("argmin,") && ["100", "200", "300"].contains(&best));
}

#[test]
fn output_flag_writes_a_file() {
    let dir = TempDir::new().unwrap();
    let csv = write_csv(&dir, "x.csv", "x", &pareto_values(50));
    let target = dir.path().join("qq.csv");
    let out = dast(&[
        "qqplot",
        "--input",
        p(&csv),
        "--column",
        "x",
        "-o",
        p(&target),
    ]);
    assert!(out.status.success() && out.stdout.is_empty());
    assert!(std::fs::read_to_string(target)
        .unwrap()
        .starts_with("x,y\n"));
}
