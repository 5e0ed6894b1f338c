use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use iptv_amc::oracle::erlang_b;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_iptv-amc"))
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_doc(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// Rows of a CSV as maps from header name to cell.
fn records(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

const ONE_ZONE: &str = r#"
[[mcs]]
label = "only"
slots = 1
area_fraction = 1.0

[traffic]
lambda = 0.1
mean_watch_minutes = 10.0

[capacity]
K_connections = 2

[mobility]
model = "none"
"#;

#[test]
fn analyze_single_zone_is_erlang_b() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write_doc(&dir, "one.toml", ONE_ZONE);
    let o = run(&["analyze", "--scenario", &doc]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = records(&stdout(&o));
    assert_eq!(rows.len(), 1);
    let pb: f64 = rows[0]["Pb_analysis"].parse().unwrap();
    assert!((pb - erlang_b(1.0, 2)).abs() < 1e-12);
    assert_eq!(rows[0]["state_count"], "3");
    assert_eq!(rows[0]["Pb_sim"], "");
}

#[test]
fn analyze_reference_sweep() {
    let o = run(&[
        "analyze",
        "--scenario",
        scenarios().join("reference_cell.toml").to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rows = records(&stdout(&o));
    assert_eq!(rows.len(), 6);
    let pb: Vec<f64> = rows.iter().map(|r| r["Pb_analysis"].parse().unwrap()).collect();
    assert!(pb.windows(2).all(|w| w[0] < w[1]));
    assert!((pb[4] - 0.1519378).abs() < 1e-6);
}

#[test]
fn validation_and_runtime_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_doc(&dir, "bad.toml", &ONE_ZONE.replace("slots = 1", "slots = 0"));
    let o = run(&["analyze", "--scenario", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mcs[0].slots"));

    let unknown = write_doc(&dir, "unknown.toml", &format!("{ONE_ZONE}\nbogus = 1\n"));
    assert_eq!(run(&["analyze", "--scenario", &unknown]).status.code(), Some(2));
    assert_eq!(
        run(&["analyze", "--scenario", "/nonexistent.toml"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["analyze"]).status.code(), Some(2));

    let doc = write_doc(&dir, "one.toml", ONE_ZONE);
    assert_eq!(
        run(&["analyze", "--scenario", &doc, "--alpha", "1.5"]).status.code(),
        Some(2)
    );
    let o = run(&["plan", "--scenario", &doc, "--target-pb", "1e-9", "--k-max", "3"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn empty_sweep_prints_the_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write_doc(
        &dir,
        "empty.toml",
        &format!("{ONE_ZONE}\n[sweep]\nparameter = \"lambda\"\nvalues = []\n"),
    );
    let o = run(&["analyze", "--scenario", &doc]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("sweep_value,Pb_analysis"));
}

#[test]
fn simulation_output_is_byte_identical_per_seed() {
    let doc = scenarios().join("reference_cell_w10.toml");
    let args = [
        "simulate",
        "--scenario",
        doc.to_str().unwrap(),
        "--reps",
        "3",
        "--horizon-min",
        "2000",
        "--seed",
        "42",
    ];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    assert!(run(&with_out).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
}

#[test]
fn single_replication_leaves_intervals_empty() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write_doc(&dir, "one.toml", ONE_ZONE);
    let o = run(&["simulate", "--scenario", &doc, "--reps", "1", "--horizon-min", "5000"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let rows = records(&stdout(&o));
    assert_eq!(rows[0]["Pb_sim_ci99"], "");
    assert_eq!(rows[0]["EY_sim_ci99"], "");
    assert!(!rows[0]["Pb_sim"].is_empty());
}

#[test]
fn measured_rates_document_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let rates_doc = dir.path().join("measured.toml");
    let src = scenarios().join("random_walk_cell.toml");
    let o = run(&[
        "measure-mobility",
        "--scenario",
        src.to_str().unwrap(),
        "--reps",
        "2",
        "--horizon-min",
        "3000",
        "--rates-doc",
        rates_doc.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let measured = records(&stdout(&o));
    assert!(measured
        .iter()
        .all(|r| r["rate_per_min"].parse::<f64>().unwrap() >= 0.0));

    let text = std::fs::read_to_string(&rates_doc).unwrap();
    assert!(text.contains("explicit"));
    let o = run(&["analyze", "--scenario", rates_doc.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = records(&stdout(&o));
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r["Pd_analysis"].parse::<f64>().unwrap() > 0.0));

    // Without measured rates the walk cannot be analyzed.
    let o = run(&["analyze", "--scenario", src.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fit_alpha_reproduces_the_curve() {
    let o = run(&[
        "fit-alpha",
        "--points",
        scenarios().join("alpha_points.csv").to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rows = records(&stdout(&o));
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r["residual"].parse::<f64>().unwrap().abs() <= 0.08));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha ="));
}

#[test]
fn plan_reports_one_minimum_per_lambda() {
    let o = run(&[
        "plan",
        "--scenario",
        scenarios().join("reference_cell.toml").to_str().unwrap(),
        "--k-max",
        "60",
    ]);
    assert!(o.status.success());
    let rows = records(&stdout(&o));
    let minima: Vec<u32> = rows
        .iter()
        .filter(|r| r["minimal"] == "true")
        .map(|r| r["K"].parse().unwrap())
        .collect();
    assert_eq!(minima.len(), 6);
    assert!(minima.windows(2).all(|w| w[0] <= w[1]));
}
