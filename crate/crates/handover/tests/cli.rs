//! Command-line interface: exit codes, the machine-greppable error prefix,
//! and byte-identical reruns of the `run` subcommand.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::data_dir;

fn handover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_handover"))
        .args(args)
        .output()
        .expect("spawn handover binary")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Every failure must exit nonzero and print exactly one stderr line of the
/// form `error[Class]: message`.
fn assert_single_error_line(out: &Output, class: &str) {
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(out));
    let err = stderr(out);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "expected one error line, got: {err}");
    assert!(
        lines[0].starts_with(&format!("error[{class}]: ")),
        "expected class {class}, got: {}",
        lines[0]
    );
}

/// Short scenario written next to the bundled skeletons so the relative
/// path resolves; returns the scenario path.
fn write_mini_scenario(dir: &Path) -> std::path::PathBuf {
    let skeleton = data_dir().join("skeletons/bright_near.jsonl");
    let text = format!(
        r#"
name = "mini"
robot = "fanuc-lrmate-200id7l-like"
pipeline = "feedback-accel"
duration = 2.0
skeleton = "{}"

[rates]
command = 50.0
safety = 200.0
perception = 30.0

[delivery]
orientation = [1.0, 0.0, 0.0, 0.0]

[poses]
object_position = [0.45, 0.35, 0.5]
object_orientation = [0.0, 1.0, 0.0, 0.0]
home_q = [0.0, 0.3, -0.3, 0.0, -0.6, 0.0]
"#,
        skeleton.display()
    );
    let path = dir.join("mini.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn models_lists_the_bundled_arms() {
    let out = handover(&["models"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("fanuc-lrmate-200id7l-like"));
    assert!(text.contains("kinova-gen3-like"));
    assert!(text.contains("dof=6") && text.contains("dof=7"));
}

#[test]
fn validate_accepts_every_bundled_scenario() {
    for entry in std::fs::read_dir(data_dir().join("scenarios")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().map(|x| x == "toml") != Some(true) {
            continue;
        }
        let out = handover(&["validate", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}: {}", path.display(), stderr(&out));
        assert!(stdout(&out).starts_with("ok: "));
    }
}

#[test]
fn validate_rejects_a_missing_file_with_an_error_class() {
    let out = handover(&["validate", "/nonexistent/scenario.toml"]);
    assert_single_error_line(&out, "IoError");
}

#[test]
fn validate_rejects_malformed_toml_with_a_parse_class() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "name = [unclosed").unwrap();
    let out = handover(&["validate", path.to_str().unwrap()]);
    assert_single_error_line(&out, "ParseError");
}

#[test]
fn stats_reports_windowed_sigma() {
    let skeleton = data_dir().join("skeletons/dark_near.jsonl");
    let out = handover(&["stats", skeleton.to_str().unwrap(), "--window", "30"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("keypoint: right_wrist"));
    assert!(text.contains("sigma_m"));
    // One line per axis.
    for axis in ["x ", "y ", "z "] {
        assert!(text.lines().any(|l| l.starts_with(axis)), "missing axis row in: {text}");
    }
}

#[test]
fn stats_rejects_an_unknown_keypoint() {
    let skeleton = data_dir().join("skeletons/bright_near.jsonl");
    let out = handover(&[
        "stats",
        skeleton.to_str().unwrap(),
        "--keypoint",
        "left_antenna",
    ]);
    assert_single_error_line(&out, "ConfigError");
}

#[test]
fn adapt_solves_the_bundled_fixture() {
    let env = data_dir().join("env/elbow_post.json");
    let out = handover(&[
        "adapt",
        "--model",
        "fanuc-lrmate-200id7l-like",
        "--position",
        "0.55",
        "-0.20",
        "0.90",
        "--env",
        env.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("q_g = ["));
    assert!(text.contains("d_after"));
}

#[test]
fn adapt_rejects_an_unknown_model() {
    let env = data_dir().join("env/elbow_post.json");
    let out = handover(&[
        "adapt",
        "--model",
        "not-a-robot",
        "--position",
        "0.5",
        "0.0",
        "0.5",
        "--env",
        env.to_str().unwrap(),
    ]);
    assert_single_error_line(&out, "UnknownModel");
}

#[test]
fn run_writes_outputs_and_reruns_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_mini_scenario(dir.path());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out_dir in [&out_a, &out_b] {
        let out = handover(&[
            "run",
            scenario.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            "7",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert!(stdout(&out).contains("mini: min_distance="));
    }
    for file in ["mini.tsv", "mini.summary.json"] {
        let a = std::fs::read(out_a.join(file)).unwrap();
        let b = std::fs::read(out_b.join(file)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn run_rejects_a_missing_scenario_path() {
    let out = handover(&["run", "/nonexistent/scenario.toml"]);
    assert_single_error_line(&out, "ConfigError");
}

#[test]
fn bad_usage_exits_with_the_clap_code() {
    let out = handover(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = handover(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let out = handover(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("handover"));
}
