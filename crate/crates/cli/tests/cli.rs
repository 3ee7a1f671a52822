use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gsqg_cli::config::{Overrides, RunConfig};
use gsqg_cli::{main_with_args, CliError, EXIT_CONFIG, EXIT_EVENT, EXIT_NUMERICAL, EXIT_OK};
use tempfile::TempDir;

fn gsqg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsqg")).args(args).env("GSQG_THREADS", "1").output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn minimal_file_takes_defaults() {
    let cfg = RunConfig::resolve_str("preset = \"disk\"\n", &Overrides::default()).unwrap();
    assert_eq!(cfg, RunConfig::default());
}

#[test]
fn overrides_beat_the_file() {
    let mut o = Overrides::default();
    o.push_assignment("t_end=0.25").unwrap();
    o.push("nodes", "64");
    let cfg = RunConfig::resolve_str("t_end = 2.0\nnodes = 128\n", &o).unwrap();
    assert_eq!(cfg.t_end, 0.25);
    assert_eq!(cfg.nodes, 64);
}

#[test]
fn every_config_problem_is_reported_at_once() {
    let err = RunConfig::resolve_str("alpha = 0.5\nnodes = 4\nbogus = 1\n", &Overrides::default()).unwrap_err();
    let CliError::Config(problems) = err else { panic!("expected a config error") };
    let joined = problems.join("\n");
    assert!(joined.contains("bogus"), "{joined}");
    let err = RunConfig::resolve_str("alpha = 0.5\nnodes = 4\n", &Overrides::default()).unwrap_err();
    let CliError::Config(problems) = err else { panic!("expected a config error") };
    assert!(problems.len() >= 2, "{problems:?}");
    assert!(problems.iter().any(|p| p.contains("alpha")));
    assert!(problems.iter().any(|p| p.contains("nodes")));
}

#[test]
fn monitor_profile_requires_small_alpha() {
    let bad = RunConfig::resolve_str("profile = \"monitor\"\nalpha = 0.25\n", &Overrides::default());
    assert!(matches!(bad, Err(CliError::Config(_))));
    let ok = RunConfig::resolve_str("profile = \"monitor\"\nalpha = 0.1\n", &Overrides::default());
    assert!(ok.is_ok());
}

#[test]
fn echo_round_trips() {
    let mut o = Overrides::default();
    o.push_assignment("preset=\"ellipse\"").unwrap();
    o.push_assignment("semi_axes=[2.0, 0.5]").unwrap();
    o.push_assignment("eta=0.01").unwrap();
    let cfg = RunConfig::resolve_str("alpha = 0.2\n", &o).unwrap();
    let again = RunConfig::resolve_str(&cfg.echo(), &Overrides::default()).unwrap();
    assert_eq!(cfg, again);
}

#[test]
fn error_exit_codes() {
    assert_eq!(CliError::Numerical("x".into()).exit_code(), EXIT_NUMERICAL);
    assert_eq!(CliError::Config(vec![]).exit_code(), EXIT_CONFIG);
    assert_eq!(main_with_args(["gsqg", "--help"]), EXIT_OK);
    assert_eq!(main_with_args(["gsqg", "frobnicate"]), EXIT_CONFIG);
}

#[test]
fn rejected_alpha_exits_with_config_error() {
    let dir = TempDir::new().unwrap();
    let out = gsqg(&["run", "--alpha", "0.5", "--nodes", "3", "--out", &out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    let err = text(&out.stderr);
    assert!(err.contains("alpha") && err.contains("nodes"), "{err}");
}

#[test]
fn config_file_and_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg_path = dir.path().join("run.toml");
    fs::write(&cfg_path, "preset = \"disk\"\nnodes = 64\ndt = 0.01\nt_end = 1.0\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = gsqg(&["run", "--config", cfg_path.to_str().unwrap(), "--t-end", "0.03", "--out", &out_arg(&out_dir)]);
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", text(&out.stderr));
    let report = fs::read_to_string(out_dir.join("report.txt")).unwrap();
    assert!(report.contains("t_end = 0.03"), "{report}");
    assert!(report.contains("termination = completed"));
    for file in ["timeseries.csv", "snapshots.jsonl", "events.jsonl", "config.echo"] {
        assert!(out_dir.join(file).exists(), "{file} missing");
    }
    assert!(!out_dir.join(".gsqg.lock").exists());
}

#[test]
fn approaching_patches_end_in_an_event() {
    let dir = TempDir::new().unwrap();
    let out = gsqg(&["run", "--preset", "two-patch-approach", "--nodes", "64", "--out", &out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(EXIT_EVENT), "{}", text(&out.stdout));
    let events = fs::read_to_string(dir.path().join("events.jsonl")).unwrap();
    assert!(!events.trim().is_empty());
}

#[test]
fn runs_are_deterministic() {
    let runs: Vec<String> = (0..2)
        .map(|_| {
            let dir = TempDir::new().unwrap();
            let out = gsqg(&[
                "run", "--preset", "ellipse", "--nodes", "64", "--dt", "0.01", "--t-end", "0.1", "--k-diag", "2",
                "--out", &out_arg(dir.path()),
            ]);
            assert_eq!(out.status.code(), Some(EXIT_OK));
            fs::read_to_string(dir.path().join("timeseries.csv")).unwrap()
        })
        .collect();
    assert!(runs[0].lines().count() > 3);
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn locked_output_directory_is_refused() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join(".gsqg.lock"), "").unwrap();
    let out = gsqg(&["diagnose", "--preset", "disk", "--nodes", "64", "--out", &out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    assert!(text(&out.stderr).contains("locked"));
}

#[test]
fn diagnose_writes_trend_table_for_layered_presets() {
    let dir = TempDir::new().unwrap();
    let out = gsqg(&[
        "diagnose", "--preset", "bump-pow-outer", "--levels", "6", "--nodes", "64", "--set", "trend_doublings=1",
        "--out", &out_arg(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("Q = "), "{stdout}");
    let trend = fs::read_to_string(dir.path().join("trend.csv")).unwrap();
    assert_eq!(trend.lines().count(), 3);
    assert!(dir.path().join("diagnostics.csv").exists());
}

#[test]
fn scaling_study_skips_the_fit_for_zero_data() {
    let dir = TempDir::new().unwrap();
    let out = gsqg(&[
        "scaling-study", "--preset", "circles", "--set", "radii=[]", "--set", "weights=[]",
        "--out", &out_arg(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", text(&out.stderr));
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("skipped"), "{report}");
}
