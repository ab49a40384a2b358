use std::process::{Command, Output};

use stoprule::cli::{A002464Record, ErrorRecord, EstimateRecord, FormulaRecord, OptimalRecord};

fn stoprule(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stoprule"))
        .args(args)
        .env_remove("STOPRULE_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json_rows<T: serde::de::DeserializeOwned>(out: &Output) -> Vec<T> {
    stdout(out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn formula_reports_exact_values() {
    let out = stoprule(&["formula", "--n", "7", "--r", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("1/5"), "{text}");
    assert!(text.contains("6/35"), "{text}");

    let out = stoprule(&["formula", "--n", "7", "--r", "4", "--format", "json"]);
    let rows: Vec<FormulaRecord> = json_rows(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].command, "formula");
    assert_eq!(rows[0].lambda_ratio, "1/5");
    assert_eq!(rows[0].success_exact, "6/35");
    assert_eq!(rows[0].pi_count, "144");
}

#[test]
fn alpha_outside_window_is_an_error() {
    let out = stoprule(&["formula", "--n", "10", "--alpha", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err: ErrorRecord =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).lines().next().unwrap()).unwrap();
    assert_eq!(err.command, "formula");
    assert!(err.message.contains("alpha"), "{}", err.message);
}

#[test]
fn r_and_alpha_are_exclusive() {
    let out = stoprule(&["formula", "--n", "10", "--r", "4", "--alpha", "0.5"]);
    assert!(!out.status.success());
}

#[test]
fn verify_exits_zero_on_agreement() {
    let out = stoprule(&["verify", "--n", "8", "--r", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("all counts match"));
}

#[test]
fn enumeration_guard_needs_force() {
    let out = stoprule(&["enumerate", "--n", "12", "--r", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn a002464_small_value() {
    let out = stoprule(&["a002464", "--n", "5", "--format", "json"]);
    let rows: Vec<A002464Record> = json_rows(&out);
    assert_eq!(rows[0].count, "14");
    assert_eq!(rows[0].fraction, "14/120");

    let text = stdout(&stoprule(&["a002464", "--n", "5"]));
    assert!(text.contains(",14,") && text.contains("14/120"), "{text}");
}

#[test]
fn optimal_threshold_row() {
    let rows: Vec<OptimalRecord> =
        json_rows(&stoprule(&["optimal", "--n", "7", "--format", "json"]));
    assert_eq!(rows[0].r_star, 5);
    assert_eq!(rows[0].p_star, "8/35");
}

#[test]
fn sweep_csv_has_a_constant_column_count() {
    let out = stoprule(&[
        "sweep",
        "--n",
        "50",
        "--alphas",
        "0.01,0.2,0.4,0.6,0.8",
        "--trials",
        "2000",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).ends_with('\n'));
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(out.stdout.as_slice());
    let width = reader.headers().unwrap().len();
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert!(records.iter().all(|r| r.len() == width));
    let rows: Vec<EstimateRecord> = records
        .iter()
        .map(|r| r.deserialize(Some(reader.headers().unwrap())).unwrap())
        .collect();
    assert_eq!(rows.len(), 5);
    // The first alpha floors below r = 3 and is reported in its own row.
    assert!(rows[0].error.is_some() && rows[0].p_hat.is_none());
    assert!(rows[1..]
        .iter()
        .all(|r| r.error.is_none() && r.p_hat.is_some()));
}

#[test]
fn output_does_not_depend_on_workers() {
    let run = |w: &str| {
        stoprule(&[
            "simulate",
            "--n",
            "300",
            "--r",
            "150",
            "--trials",
            "20000",
            "--seed",
            "9",
            "--workers",
            w,
            "--format",
            "json",
        ])
        .stdout
    };
    let one = run("1");
    assert_eq!(one, run("8"));
    let row: EstimateRecord = serde_json::from_slice(&one).unwrap();
    assert_eq!(row.trials, 20000);
    assert_eq!(row.r, Some(150));
}

#[test]
fn out_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let out = stoprule(&[
        "formula",
        "--n",
        "7",
        "--r",
        "4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("command,"));
    assert!(written.contains("6/35"));
}
