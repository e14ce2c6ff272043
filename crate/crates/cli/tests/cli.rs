//! End-to-end tests of the `congestion-lab` binary: every test shells out to
//! the compiled executable and inspects exit codes, stdout/stderr, and the
//! files written to --out.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use congestion_lab::metrics::{knee_cliff, SweepPoint};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_congestion-lab"))
}

/// A per-test scratch directory, recreated empty on each run.
fn fresh_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("congestion-lab-cli-{tag}"));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn binary");
    assert!(
        out.status.success(),
        "expected success for {args:?}, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_failing(args: &[&str], expected_code: i32) -> Output {
    let out = bin().args(args).output().expect("spawn binary");
    assert_eq!(
        out.status.code(),
        Some(expected_code),
        "expected exit {expected_code} for {args:?}\nstderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(
        !out.stderr.is_empty(),
        "a failing command must explain itself on stderr"
    );
    out
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn run_is_byte_reproducible() {
    let d1 = fresh_dir("repro-1");
    let d2 = fresh_dir("repro-2");
    let args = |d: &Path| {
        vec![
            "run".to_string(),
            "myth-fastlink".to_string(),
            "--seed".to_string(),
            "42".to_string(),
            "--trace".to_string(),
            "--timeseries".to_string(),
            "--out".to_string(),
            d.display().to_string(),
        ]
    };
    let o1 = bin().args(args(&d1)).output().expect("spawn");
    let o2 = bin().args(args(&d2)).output().expect("spawn");
    assert!(o1.status.success() && o2.status.success());
    assert_eq!(o1.stdout, o2.stdout, "stdout must be reproducible");
    for file in ["summary.csv", "timeseries.csv", "trace.log"] {
        let a = fs::read(d1.join(file)).expect(file);
        let b = fs::read(d2.join(file)).expect(file);
        assert_eq!(a, b, "{file} must be byte-identical across equal-seed runs");
    }
}

#[test]
fn output_files_appear_only_when_requested() {
    let dir = fresh_dir("files");
    run_ok(&["run", "myth-balanced", "--out", dir.to_str().unwrap()]);
    assert!(dir.join("summary.csv").is_file(), "summary.csv is always written");
    assert!(!dir.join("timeseries.csv").exists(), "timeseries.csv needs --timeseries");
    assert!(!dir.join("trace.log").exists(), "trace.log needs --trace");
}

#[test]
fn run_stdout_is_the_aggregate_summary_row() {
    let dir = fresh_dir("stdout");
    let out = run_ok(&["run", "myth-balanced", "--out", dir.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).expect("utf8 stdout");
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("scenario,conn,sent,unique_delivered,retransmitted,goodput_bps,throughput_bps,mean_delay_s,completion_s,fairness_index")
    );
    let row = lines.next().expect("aggregate row");
    assert!(row.starts_with("myth-balanced,aggregate,"), "got: {row}");
    assert_eq!(lines.next(), None, "exactly one data row on stdout");
}

#[test]
fn missing_scenario_file_is_a_usage_error() {
    let out = run_failing(&["run", "/nonexistent/missing.scn"], 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("no scenario file or built-in"),
        "stderr should name the problem, got: {err}"
    );
}

#[test]
fn unknown_builtin_is_a_usage_error() {
    let out = run_failing(&["run", "not-a-scenario"], 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no scenario file or built-in"), "got: {err}");
}

#[test]
fn malformed_scenario_file_is_a_usage_error() {
    let dir = fresh_dir("malformed");
    let path = dir.join("broken.scn");
    fs::write(&path, "[topology]\nnode A\nlink A B 1e6 0\n").expect("write");
    run_failing(&["run", path.to_str().unwrap()], 2);
}

#[test]
fn trace_log_opens_with_header_and_first_wakeup() {
    let dir = fresh_dir("trace");
    run_ok(&["run", "myth-balanced", "--trace", "--out", dir.to_str().unwrap()]);
    let trace = read(&dir.join("trace.log"));
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("t_s,event,detail"));
    let first = lines.next().expect("at least one event");
    assert!(
        first.starts_with("0.000000000,source-wakeup"),
        "first event should be the t=0 source wakeup, got: {first}"
    );
}

#[test]
fn sweep_emits_the_power_curve_and_its_knee() {
    let dir = fresh_dir("sweep");
    let out = run_ok(&["sweep", "knee-open", "--out", dir.to_str().unwrap()]);
    let csv = read(&dir.join("sweep.csv"));
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        csv,
        "stdout and sweep.csv must carry the same table"
    );

    let mut points = Vec::new();
    let mut knee_line = None;
    for line in csv.lines().skip(1) {
        if let Some(rest) = line.strip_prefix("# knee_load=") {
            knee_line = Some(rest.to_string());
        } else if !line.starts_with('#') {
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.parse().expect("numeric column"))
                .collect();
            assert_eq!(cols.len(), 4, "offered,throughput,delay,power");
            points.push(SweepPoint {
                offered_load: cols[0],
                throughput: cols[1],
                mean_delay: cols[2],
            });
        }
    }
    assert_eq!(points.len(), 9, "nine sweep points");
    assert!(
        points
            .windows(2)
            .all(|w| w[1].offered_load > w[0].offered_load),
        "offered load strictly increasing"
    );

    // The knee reported in the footer must match what the metrics module
    // computes from the very rows the file carries.
    let recomputed = knee_cliff(&points).expect("well-formed sweep");
    assert_eq!(knee_line.expect("knee footer"), format!("{:.8e}", recomputed.knee_load));
}

#[test]
fn empty_sweep_values_are_rejected() {
    let dir = fresh_dir("sweep-empty");
    run_failing(
        &[
            "sweep", "knee-open", "--param", "connections.c1.workload.rate",
            "--values", "", "--out", dir.to_str().unwrap(),
        ],
        2,
    );
}

#[test]
fn unknown_sweep_parameter_is_rejected() {
    let dir = fresh_dir("sweep-param");
    run_failing(
        &[
            "sweep", "knee-open", "--param", "no.such.knob",
            "--values", "1e5,2e5,3e5", "--out", dir.to_str().unwrap(),
        ],
        2,
    );
}

#[test]
fn sweep_values_require_a_param() {
    run_failing(&["sweep", "knee-open", "--values", "1e5,2e5"], 2);
}

#[test]
fn export_round_trips_every_builtin() {
    let dir = fresh_dir("export");
    let list = run_ok(&["list"]);
    let names = String::from_utf8(list.stdout).expect("utf8");
    assert!(!names.trim().is_empty());
    for name in names.lines() {
        let exported = run_ok(&["export", name]);
        let path = dir.join(format!("{name}.scn"));
        fs::write(&path, &exported.stdout).expect("write exported scenario");

        let from_file = dir.join(format!("{name}-file"));
        let from_builtin = dir.join(format!("{name}-builtin"));
        fs::create_dir_all(&from_file).unwrap();
        fs::create_dir_all(&from_builtin).unwrap();
        let a = run_ok(&["run", path.to_str().unwrap(), "--out", from_file.to_str().unwrap()]);
        let b = run_ok(&["run", name, "--out", from_builtin.to_str().unwrap()]);
        assert_eq!(a.stdout, b.stdout, "{name}: stdout must survive the round trip");
        assert_eq!(
            fs::read(from_file.join("summary.csv")).unwrap(),
            fs::read(from_builtin.join("summary.csv")).unwrap(),
            "{name}: summary.csv must survive the round trip"
        );
    }
}

#[test]
fn export_of_unknown_builtin_is_a_usage_error() {
    run_failing(&["export", "no-such-builtin"], 2);
}

#[test]
fn event_budget_exhaustion_is_a_runtime_error() {
    let dir = fresh_dir("budget");
    let path = dir.join("budget.scn");
    fs::write(
        &path,
        "[topology]\nnode S\nnode D\nlink S D 1e6 0\n\n\
         [connections]\nconn c1 S D workload=cbr:1e6 size=8000 transport=open\n\n\
         [run]\nduration 1\nmax_events 10\nbottleneck S D\n",
    )
    .expect("write");
    let out = run_failing(&["run", path.to_str().unwrap(), "--out", dir.to_str().unwrap()], 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("event budget exhausted"), "got: {err}");
}

#[test]
fn list_names_every_builtin() {
    let out = run_ok(&["list"]);
    let names: Vec<&str> = std::str::from_utf8(&out.stdout).expect("utf8").lines().collect();
    let expected = [
        "myth-buffers",
        "myth-buffers-repaired",
        "myth-fastlink",
        "myth-fastlink-upgraded",
        "myth-fastlink-repaired",
        "myth-balanced",
        "myth-balanced-halved",
        "knee-open",
        "knee-open-det",
        "cliff-closed",
        "fairness-fifo",
        "fairness-rr",
        "fairness-rr-equal",
        "choke-rein",
        "schemes-cute",
        "schemes-linear",
        "schemes-slowstart",
        "schemes-binary",
        "schemes-delay",
    ];
    assert_eq!(names, expected);
}
