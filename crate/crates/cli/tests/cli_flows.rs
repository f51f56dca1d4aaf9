//! End-to-end CLI flows: gen -> exec on the shipped fixtures, run-log
//! replay, trajectory export, and error paths.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use loopsynth_core::benchmarks;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_loopsynth")
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("CLI runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn fixture_files_match_builtin_programs() {
    let comb = std::fs::read_to_string(repo_root().join("fixtures/comb_sort.x86.txt")).unwrap();
    assert_eq!(comb, benchmarks::comb_sort_text());
    let fill =
        std::fs::read_to_string(repo_root().join("fixtures/pattern1_fill.tis.txt")).unwrap();
    assert_eq!(fill, benchmarks::pattern1_fill_text());
}

#[test]
fn exec_sort_fixture_on_generated_test_set_is_perfect() {
    let dir = std::env::temp_dir().join(format!("loopsynth-flow-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let problems = dir.join("fastsort.test.problems");
    let out = run(&[
        "gen",
        "--benchmark",
        "fast-sort",
        "--split",
        "test",
        "--count",
        "12",
        "--seed",
        "5",
        "--out",
        problems.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "gen failed: {}", String::from_utf8_lossy(&out.stderr));

    let program = repo_root().join("fixtures/comb_sort.x86.txt");
    let out = run(&[
        "exec",
        "--program",
        program.to_str().unwrap(),
        "--problems",
        problems.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("perfect: true"), "exec output:\n{text}");
    assert!(text.contains("fully_correct: true"), "exec output:\n{text}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn exec_image_fixture_solves_pattern() {
    let program = repo_root().join("fixtures/pattern1_fill.tis.txt");
    let image = repo_root().join("fixtures/pattern1.image");
    let out = run(&[
        "exec",
        "--program",
        program.to_str().unwrap(),
        "--image",
        image.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("solved: true"), "exec output:\n{text}");
}

#[test]
fn run_with_fixed_seed_writes_identical_logs() {
    let base = std::env::temp_dir().join(format!("loopsynth-runlog-{}", std::process::id()));
    let dirs = [base.join("a"), base.join("b")];
    for dir in &dirs {
        let out = run(&[
            "run",
            "--benchmark",
            "sum-of-squares",
            "--seed",
            "1",
            "--period",
            "1500",
            "--max-periods",
            "2",
            "--train-count",
            "40",
            "--test-count",
            "40",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dirs[0].join("runs.jsonl")).unwrap();
    let b = std::fs::read(dirs[1].join("runs.jsonl")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "run logs with the same seed must be byte-identical");
    std::fs::remove_dir_all(&base).ok();
}

#[test]
fn trace_exports_rows_per_milestone() {
    let base = std::env::temp_dir().join(format!("loopsynth-trace-{}", std::process::id()));
    let out = run(&[
        "protocol",
        "--benchmark",
        "cube-elements",
        "--level",
        "3,2000,3",
        "--seed-base",
        "9",
        "--train-count",
        "60",
        "--test-count",
        "80",
        "--no-extend",
        "--out",
        base.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = base.join("runs.jsonl");
    let out = run(&[
        "trace",
        "--log",
        log.to_str().unwrap(),
        "--seed-base",
        "9",
        "--train-count",
        "60",
        "--test-count",
        "80",
        "--out",
        base.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(base.join("trajectory.csv")).unwrap();
    let log_text = std::fs::read_to_string(&log).unwrap();
    let milestones: usize = loopsynth_core::harness::read_run_log(&log_text)
        .unwrap()
        .iter()
        .map(|r| r.milestones.len())
        .sum();
    assert_eq!(csv.lines().count(), milestones + 1, "header plus one row per milestone");
    std::fs::remove_dir_all(&base).ok();
}

#[test]
fn unknown_names_are_rejected_with_guidance() {
    let out = run(&["run", "--benchmark", "sort-of-fast"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown benchmark"), "stderr: {err}");
    assert!(err.contains("fast-sort"), "stderr should list valid names: {err}");

    let out = run(&["run", "--benchmark", "image-pattern-1", "--profile", "bogus"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown profile"));

    // mismatched profile for the benchmark
    let out = run(&["run", "--benchmark", "cube-elements", "--profile", "tis100-p21"]);
    assert!(!out.status.success());
}

#[test]
fn config_file_supplies_defaults() {
    let base = std::env::temp_dir().join(format!("loopsynth-config-{}", std::process::id()));
    std::fs::create_dir_all(&base).unwrap();
    let config = base.join("defaults.conf");
    std::fs::write(
        &config,
        "benchmark = sum-of-squares\nseed = 4\nperiod = 1000\nmax-periods = 2\ntrain-count = 30\ntest-count = 30\n",
    )
    .unwrap();
    let out = run(&["--config", config.to_str().unwrap(), "run"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("benchmark: sum-of-squares"), "{text}");
    assert!(text.contains("evaluations: 2000"), "config period*max_periods: {text}");
    std::fs::remove_dir_all(&base).ok();
}
