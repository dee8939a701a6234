//! End-to-end binary tests: exit codes, error routing, and output shape for
//! every subcommand, driven through `std::process::Command`.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reldep"))
}

/// Fresh scratch directory per test, removed on drop.
struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Scratch {
        let dir = std::env::temp_dir().join(format!("reldep-cli-{}-{tag}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn file(&self, name: &str, contents: &str) -> String {
        let path = self.0.join(name);
        fs::write(&path, contents).unwrap();
        path.to_str().unwrap().to_string()
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).to_str().unwrap().to_string()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should launch")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code (killed by signal?)")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// A small tie-free 3-column CSV. No pair is perfectly monotone, so every
/// jackknife variance stays positive.
fn demo_csv() -> String {
    let mut text = String::new();
    let perm_b = [4, 9, 1, 12, 6, 15, 3, 10, 0, 13, 7, 2, 11, 5, 14, 8];
    let perm_c = [11, 2, 14, 5, 8, 0, 13, 6, 15, 3, 9, 12, 1, 10, 4, 7];
    for t in 0..16 {
        let a = t as f64;
        let b = perm_b[t] as f64;
        let c = perm_c[t] as f64 + 0.25;
        text.push_str(&format!("{a},{b},{c}\n"));
    }
    text
}

// ---------------------------------------------------------------------------
// Usage errors: exit 2
// ---------------------------------------------------------------------------

#[test]
fn no_arguments_is_a_usage_error() {
    let out = run(&[]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
}

#[test]
fn unknown_variant_is_a_usage_error() {
    let out = run(&["test", "--input", "/definitely/missing.csv", "--variant", "bogus"]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("bogus"), "stderr: {}", stderr(&out));
}

#[test]
fn unknown_kernel_is_reported_before_io() {
    // Both the kernel and the path are bad; argument validation must win.
    let out = run(&["test", "--input", "/definitely/missing.csv", "--kernel", "pearson"]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("pearson"), "stderr: {}", stderr(&out));
}

#[test]
fn classical_direction_rejects_nonzero_delta() {
    let out = run(&[
        "test",
        "--input",
        "/definitely/missing.csv",
        "--direction",
        "classical",
        "--variant",
        "nv",
        "--delta",
        "0.3",
    ]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
}

#[test]
fn simulate_rejects_tau_and_rho_together() {
    let out = run(&[
        "simulate", "--n", "10", "--p", "3", "--tau", "0.2", "--rho", "0.3",
    ]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
}

#[test]
fn pair_flag_must_be_one_based() {
    let out = run(&[
        "simulate", "--n", "10", "--p", "4", "--model", "m3", "--pair", "0,2", "--reps", "1",
    ]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("1-based"), "stderr: {}", stderr(&out));
}

// ---------------------------------------------------------------------------
// Input errors: exit 3
// ---------------------------------------------------------------------------

#[test]
fn missing_input_file_is_an_io_error() {
    let out = run(&["test", "--input", "/definitely/missing.csv"]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
    assert!(
        stderr(&out).contains("/definitely/missing.csv"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn ragged_csv_is_a_parse_error_with_location() {
    let s = Scratch::new("ragged");
    let input = s.file("bad.csv", "1.0,2.0\n3.0,4.0\n5.0\n");
    let out = run(&["test", "--input", &input]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("bad.csv:3"), "stderr: {err}");
}

#[test]
fn non_numeric_cell_is_a_parse_error() {
    let s = Scratch::new("nonnum");
    let input = s.file("bad.csv", "1.0,2.0\noops,4.0\n");
    let out = run(&["test", "--input", &input]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("bad.csv:2"), "stderr: {}", stderr(&out));
}

#[test]
fn unknown_spec_key_is_a_parse_error_with_line() {
    let s = Scratch::new("speckey");
    let spec = s.file("grid.spec", "np = 10x3\nwat = 7\n");
    let out = run(&["table", "--spec", &spec]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("grid.spec:2") && err.contains("wat"), "stderr: {err}");
}

#[test]
fn missing_spec_file_is_an_io_error() {
    let out = run(&["table", "--spec", "/definitely/missing.spec"]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
}

// ---------------------------------------------------------------------------
// Resource refusal: exit 4
// ---------------------------------------------------------------------------

#[test]
fn oversized_enumeration_is_refused() {
    let s = Scratch::new("cap");
    let mut text = String::new();
    for t in 0..150 {
        text.push_str(&format!("{}.0,{}.5\n", t, (t * 7) % 150));
    }
    let input = s.file("big.csv", &text);
    let out = run(&["test", "--input", &input, "--kernel", "tau-star"]);
    assert_eq!(code(&out), 4, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("cap"), "stderr: {}", stderr(&out));
}

// ---------------------------------------------------------------------------
// Numeric failures: exit 5
// ---------------------------------------------------------------------------

#[test]
fn constant_column_degenerates_the_variance() {
    let s = Scratch::new("degen");
    let mut text = String::new();
    for t in 0..12 {
        text.push_str(&format!("{}.0,5.0\n", t));
    }
    let input = s.file("flat.csv", &text);
    let out = run(&["test", "--input", &input]);
    assert_eq!(code(&out), 5, "stderr: {}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("degenerate") && err.contains("(1,2)"), "stderr: {err}");
}

// ---------------------------------------------------------------------------
// Happy paths: exit 0
// ---------------------------------------------------------------------------

#[test]
fn bootstrap_test_prints_a_decision() {
    let s = Scratch::new("happy");
    let input = s.file("data.csv", &demo_csv());
    let out = run(&["test", "--input", &input, "--seed", "7"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("kernel: kendall"), "stdout: {text}");
    assert!(text.contains("decision: "), "stdout: {text}");
    assert!(text.contains("critical value:"), "stdout: {text}");
}

#[test]
fn header_rows_are_skipped_when_asked() {
    let s = Scratch::new("header");
    let input = s.file("data.csv", &format!("x1,x2,x3\n{}", demo_csv()));
    let with = run(&["test", "--input", &input, "--header", "--seed", "7"]);
    assert_eq!(code(&with), 0, "stderr: {}", stderr(&with));
    // Without the flag the header row is a data row and fails to parse.
    let without = run(&["test", "--input", &input]);
    assert_eq!(code(&without), 3, "stderr: {}", stderr(&without));
}

#[test]
fn asymptotic_method_runs_without_bootstrap() {
    let s = Scratch::new("asym");
    let input = s.file("data.csv", &demo_csv());
    let out = run(&["test", "--input", &input, "--method", "asymptotic"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("method: asymptotic"), "stdout: {text}");
    assert!(!text.contains("bootstrap p-value"), "stdout: {text}");
}

#[test]
fn simulate_emits_one_csv_row_and_is_deterministic() {
    let args = [
        "simulate", "--n", "14", "--p", "4", "--reps", "4", "--boot", "10", "--seed", "3",
    ];
    let first = run(&args);
    assert_eq!(code(&first), 0, "stderr: {}", stderr(&first));
    let text = stdout(&first);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2, "stdout: {text}");
    assert!(lines[0].starts_with("n,p,model,dist,kernel"), "stdout: {text}");
    assert!(lines[1].starts_with("14,4,m1,normal,kendall"), "stdout: {text}");
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout, "simulate output drifted between runs");
}

#[test]
fn power_sweeps_the_tau_grid() {
    let out = run(&[
        "power", "--n", "12", "--p", "3", "--reps", "2", "--boot", "10", "--tau-grid",
        "0:0.2:0.1",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "stdout: {text}");
    for (row, tau) in lines[1..].iter().zip(["0", "0.1", "0.2"]) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[10], tau, "row: {row}");
    }
}

#[test]
fn table_writes_the_requested_output_file() {
    let s = Scratch::new("table");
    let spec = s.file(
        "grid.spec",
        "np = 12x3\nmodels = m1, m2\ndists = normal\nreps = 2\nboot = 10\nseed = 5\n",
    );
    let out_path = s.path("results.csv");
    let out = run(&["table", "--spec", &spec, "--out", &out_path]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).is_empty());
    let written = fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = written.lines().collect();
    assert_eq!(lines.len(), 3, "file: {written}");
    assert!(lines[1].contains(",m1,") && lines[2].contains(",m2,"), "file: {written}");
    // Every row carries the same zeroed wall time without --timing.
    for row in &lines[1..] {
        assert!(row.ends_with(",0.000"), "row: {row}");
    }
}
