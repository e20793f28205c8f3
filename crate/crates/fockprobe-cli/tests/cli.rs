//! End-to-end checks of the binary: table schemas, exit codes, output
//! determinism, and the dump/load cycle.

use std::path::Path;
use std::process::{Command, Output};

fn fockprobe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fockprobe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_str(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 output")
}

/// Split a CSV body into rows of fields, skipping the header.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|line| line.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn id_scan_number_ladder() {
    let output = fockprobe(&[
        "id-scan",
        "--state",
        "number:0..5",
        "--profile",
        "bosonic",
    ]);
    assert!(output.status.success());
    let text = stdout_str(&output);
    assert!(text.starts_with("descriptor,i_d,closed_form,abs_diff\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 6);
    for (m, row) in rows.iter().enumerate() {
        assert_eq!(row[0], format!("number:{m}"));
        assert_eq!(row[1].parse::<f64>().unwrap(), (m + 1) as f64);
        assert_eq!(row[3].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn id_scan_fermionic_mixture_grid() {
    let output = fockprobe(&[
        "id-scan",
        "--state",
        "mixed01",
        "--p",
        "0,0.25,0.5,0.75,1",
        "--profile",
        "fermionic",
    ]);
    assert!(output.status.success());
    let rows = csv_rows(&stdout_str(&output));
    let expected = [1.0, 0.75, 0.5, 0.25, 0.0];
    for (row, want) in rows.iter().zip(expected) {
        assert_eq!(row[1].parse::<f64>().unwrap(), want);
    }
}

#[test]
fn moments_coherent_closed_forms() {
    let output = fockprobe(&[
        "moments", "--state", "coherent", "--alpha", "1", "--order", "3",
    ]);
    assert!(output.status.success());
    let rows = csv_rows(&stdout_str(&output));
    let expected = [1.0, 2.0, 7.0, 34.0];
    for (row, want) in rows.iter().zip(expected) {
        let moment: f64 = row[1].parse().unwrap();
        let closed: f64 = row[2].parse().unwrap();
        assert_eq!(closed, want);
        assert!((moment - want).abs() / want < 1e-10);
        // The quadrature column is present for pure states.
        let quad: f64 = row[4].parse().unwrap();
        assert!((quad - want).abs() < 1e-3 * want.max(1.0));
    }
}

#[test]
fn scissors_matches_closed_form() {
    let output = fockprobe(&["scissors", "--t2", "0.5", "--nbar", "1"]);
    assert!(output.status.success());
    let text = stdout_str(&output);
    assert!(text.starts_with("t2,nbar,p_sim,p_closed,success_prob\n"));
    let rows = csv_rows(&text);
    let p_sim: f64 = rows[0][2].parse().unwrap();
    let p_closed: f64 = rows[0][3].parse().unwrap();
    assert!((p_sim - 1.0 / 3.0).abs() < 1e-12);
    assert!((p_sim - p_closed).abs() < 1e-9);
}

#[test]
fn ndpa_table_schema_and_estimate() {
    let output = fockprobe(&[
        "ndpa", "--state", "coherent", "--alpha", "1", "--s", "0.1", "--trials", "200000",
        "--seed", "9",
    ]);
    assert!(output.status.success());
    let text = stdout_str(&output);
    assert!(text.starts_with(
        "protocol,state_descriptor,param,eta,trials,seed,n0,n1,estimator,\
         estimator_paper_literal,exact_expectation,std_err,bias\n"
    ));
    let rows = csv_rows(&text);
    let estimator: f64 = rows[0][8].parse().unwrap();
    let std_err: f64 = rows[0][11].parse().unwrap();
    assert!((estimator - 2.0).abs() < 4.0 * std_err);
    let n0: u64 = rows[0][6].parse().unwrap();
    let n1: u64 = rows[0][7].parse().unwrap();
    assert_eq!(n0 + n1, 200_000);
}

#[test]
fn jc_table_schema_and_estimate() {
    let output = fockprobe(&[
        "jc", "--state", "coherent", "--alpha", "0.3", "--g", "1", "--tau", "0.02", "--trials",
        "500000", "--seed", "3",
    ]);
    assert!(output.status.success());
    let text = stdout_str(&output);
    assert!(text.starts_with(
        "protocol,state_descriptor,param,eta,trials,seed,n0,n1,estimator,\
         exact_expectation,std_err,bias\n"
    ));
    let rows = csv_rows(&text);
    let estimator: f64 = rows[0][8].parse().unwrap();
    let std_err: f64 = rows[0][10].parse().unwrap();
    assert!((estimator - 1.09).abs() < 4.0 * std_err);
}

#[test]
fn json_format_parses_and_keeps_values() {
    let output = fockprobe(&[
        "id-scan",
        "--state",
        "thermal",
        "--nbar",
        "2",
        "--profile",
        "bosonic",
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout_str(&output)).unwrap();
    assert_eq!(value["columns"][1], "i_d");
    let i_d = value["rows"][0][1].as_f64().unwrap();
    assert!((i_d - 3.0).abs() < 1e-8);
}

#[test]
fn usage_errors_exit_2() {
    let output = fockprobe(&["id-scan", "--state", "bogus:1", "--profile", "bosonic"]);
    assert_eq!(output.status.code(), Some(2));
    let output = fockprobe(&["id-scan", "--state", "coherent", "--profile", "bosonic"]);
    assert_eq!(output.status.code(), Some(2));
    // clap's own usage failure carries the same code.
    let output = fockprobe(&["id-scan"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn truncation_errors_exit_3() {
    let output = fockprobe(&[
        "moments", "--state", "number:20", "--cutoff", "21", "--order", "2",
    ]);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn degenerate_statistics_exit_4() {
    let output = fockprobe(&[
        "ndpa", "--state", "coherent", "--alpha", "1", "--s", "0.1", "--eta", "0",
    ]);
    assert_eq!(output.status.code(), Some(4));
}

#[test]
fn identical_config_gives_byte_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    for path in [&first, &second] {
        let output = fockprobe(&[
            "ndpa", "--state", "coherent", "--alpha", "1", "--s", "0.1", "--trials", "100000",
            "--seed", "1234", "--out",
            path.to_str().unwrap(),
        ]);
        assert!(output.status.success());
    }
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );
}

#[test]
fn output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "2"] {
        let path = dir.path().join(format!("t{threads}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_fockprobe"))
            .env("FOCKPROBE_THREADS", threads)
            .args([
                "scissors", "--t2", "0.3", "--nbar", "2", "--out",
                path.to_str().unwrap(),
            ])
            .status()
            .expect("binary runs");
        assert!(status.success());
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn dump_then_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.json");
    let output = fockprobe(&[
        "dump", "--state", "coherent", "--alpha", "1", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert!(Path::new(&path).exists());

    let descriptor = format!("custom-json:{}", path.display());
    let output = fockprobe(&["id-scan", "--state", &descriptor, "--profile", "bosonic"]);
    assert!(output.status.success());
    let rows = csv_rows(&stdout_str(&output));
    let i_d: f64 = rows[0][1].parse().unwrap();
    assert!((i_d - 2.0).abs() < 1e-8);
    // No closed form is claimed for file-loaded states.
    assert_eq!(rows[0][2], "");
}

#[test]
fn dumped_density_loads_too() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho.json");
    let output = fockprobe(&[
        "dump", "--state", "mixed01", "--p", "0.25", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let descriptor = format!("custom-json:{}", path.display());
    let output = fockprobe(&["id-scan", "--state", &descriptor, "--profile", "fermionic"]);
    assert!(output.status.success());
    let rows = csv_rows(&stdout_str(&output));
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.75);
}

#[test]
fn verify_passes_on_clean_build() {
    let output = fockprobe(&["verify"]);
    let text = stdout_str(&output);
    assert!(
        output.status.success(),
        "verify failed:\n{text}"
    );
    assert!(text.lines().count() > 20);
    assert!(!text.contains("FAIL"));
}

#[test]
fn csv_output_round_trips_through_reparse() {
    let output = fockprobe(&[
        "moments", "--state", "number:1", "--order", "2",
    ]);
    assert!(output.status.success());
    let text = stdout_str(&output);
    // Parse every numeric field and re-render it with the same convention;
    // 17 significant digits make this the identity.
    for line in text.lines().skip(1) {
        for field in line.split(',') {
            if field.contains('e') {
                let value: f64 = field.parse().unwrap();
                assert_eq!(format!("{value:.16e}"), field);
            }
        }
    }
}
