//! Behavior of the command-line surface: exit codes, output layout, config
//! file handling.

use std::path::Path;
use std::process::Command;

fn strlfc(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_strlfc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &std::process::Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn validation_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad_p = strlfc(dir.path(), &["bounds", "--p", "1.5"]);
    assert_eq!(exit_code(&bad_p), 1);
    let bad_k = strlfc(dir.path(), &["bounds", "--k", "0"]);
    assert_eq!(exit_code(&bad_k), 1);
    let bad_delta = strlfc(dir.path(), &["schedules", "--delta", "1.0"]);
    assert_eq!(exit_code(&bad_delta), 1);
    let bad_flag = strlfc(dir.path(), &["bounds", "--nope"]);
    assert_eq!(exit_code(&bad_flag), 1);
    let svg_simulate = strlfc(
        dir.path(),
        &["simulate", "--trials", "2000", "--format", "svg"],
    );
    assert_eq!(exit_code(&svg_simulate), 1);
}

#[test]
fn runtime_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = strlfc(
        dir.path(),
        &["backoff", "--out", "/nonexistent-dir/x.csv"],
    );
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = strlfc(dir.path(), &["--help"]);
    assert_eq!(exit_code(&out), 0);
}

#[test]
fn bounds_margin_column_is_nonnegative() {
    let dir = tempfile::tempdir().unwrap();
    let out = strlfc(
        dir.path(),
        &["bounds", "--k-range", "1:22", "--p", "0.1", "--out", "fig.csv"],
    );
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("fig.csv")).unwrap();
    let mut rows = 0;
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let margin: f64 = line.split(',').nth(8).unwrap().parse().unwrap();
        assert!(margin >= 0.0, "row {line}");
        rows += 1;
    }
    assert_eq!(rows, 22);
}

#[test]
fn single_point_bounds_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = strlfc(
        dir.path(),
        &["bounds", "--k", "5", "--p", "0.3", "--out", "one.csv"],
    );
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("one.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2); // header + one data row
    assert!(rows[1].starts_with("5,"));
}

#[test]
fn backoff_reproduces_the_reference_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = strlfc(dir.path(), &["backoff", "--k", "3", "--out", "b.csv"]);
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let mut fountain = Vec::new();
    let mut st = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        fountain.push(f[1]);
        st.push(f[2]);
    }
    // Scheme-independent column is constant in p and rounds to 0.234.
    assert!(fountain.iter().all(|&v| (v - fountain[0]).abs() < 1e-12));
    assert!((fountain[0] - 0.234).abs() < 5e-4);
    // The systematic column increases with p and starts near zero.
    assert!(st.windows(2).all(|w| w[0] <= w[1] + 1e-15));
    assert!(st[0] < 1e-9 && st[1] < 0.01);
}

#[test]
fn schedules_emits_every_requested_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = strlfc(
        dir.path(),
        &[
            "schedules", "--k-range", "1:3", "--m-list", "1,16", "--p", "0.5", "--delta", "1e-3",
            "--out", "s.csv",
        ],
    );
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let data_rows = text.lines().filter(|l| !l.starts_with('#')).skip(1).count();
    assert_eq!(data_rows, 6);
}

#[test]
fn simulate_writes_summary_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = strlfc(
        dir.path(),
        &[
            "simulate", "--k", "2", "--p", "0.3", "--schedule", "2,5", "--trials", "20000",
            "--seed", "3", "--out", "sim.csv",
        ],
    );
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sim.csv")).unwrap();
    assert!(csv.contains("z_pass"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sim.json")).unwrap())
            .unwrap();
    assert_eq!(json["report"]["trials"], 20000);
    assert_eq!(json["analytic"]["z_pass"], true);
    assert_eq!(json["report"]["rng_algorithm"], "chacha12");
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "k_range = \"1:6\"\np = 0.3\nout = \"from_file.csv\"\n",
    )
    .unwrap();
    let out = strlfc(dir.path(), &["bounds", "--config", "run.toml"]);
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("from_file.csv")).unwrap();
    assert!(text.contains("# config: k=1..6 p=0.3"));

    let out = strlfc(
        dir.path(),
        &["bounds", "--config", "run.toml", "--p", "0.2", "--out", "override.csv"],
    );
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("override.csv")).unwrap();
    assert!(text.contains("# config: k=1..6 p=0.2"));

    std::fs::write(dir.path().join("bad.toml"), "unknown_key = 1\n").unwrap();
    let out = strlfc(dir.path(), &["bounds", "--config", "bad.toml"]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn svg_output_is_well_formed_and_derived_from_csv_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = strlfc(
        dir.path(),
        &["rankgap", "--k-range", "1:20", "--format", "svg", "--out", "gap.csv"],
    );
    assert_eq!(exit_code(&out), 0);
    let svg = std::fs::read_to_string(dir.path().join("gap.svg")).unwrap();
    assert!(svg.starts_with("<svg "));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("polyline"));
    assert!(dir.path().join("gap.csv").exists());
}
