//! End-to-end tests of the `taplan` binary: command output, artifact
//! round-trips, and the exit-code contract.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixture;

fn taplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taplan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_reports_valid_with_exit_zero() {
    let out = taplan(&[
        "validate",
        "--problem",
        path(&fixture("rooms.json")),
        "--plan",
        path(&fixture("rooms_valid.plan")),
        "--epsilon",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "Valid");
}

#[test]
fn validate_reports_clause_diagnostics_with_exit_one() {
    let out = taplan(&[
        "validate",
        "--problem",
        path(&fixture("rooms.json")),
        "--plan",
        path(&fixture("rooms_invalid.plan")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.starts_with("Invalid"));
    assert!(text.contains("clause 6"));
    assert!(text.contains("mutex separation"));
    assert!(text.contains("open_door_rb2_d_rm1"));
}

#[test]
fn encode_is_deterministic_and_writes_symbols() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.json");
    let second = dir.path().join("b.json");
    for out_path in [&first, &second] {
        let out = taplan(&[
            "encode",
            "--problem",
            path(&fixture("rooms.json")),
            "--epsilon",
            "1/10",
            "--out",
            path(out_path),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let a = std::fs::read(&first).unwrap();
    let b = std::fs::read(&second).unwrap();
    assert_eq!(a, b, "encoding twice must be byte-identical");
    let symbols = std::fs::read_to_string(dir.path().join("a.symbols.json")).unwrap();
    assert!(symbols.contains("\"goal_location\": \"goal_M\""));
}

#[test]
fn encode_checker_compat_renders_flat_text() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.json");
    let out = taplan(&[
        "encode",
        "--problem",
        path(&fixture("tiny.json")),
        "--format",
        "checker-compat",
        "--out",
        path(&net),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&net).unwrap();
    assert!(text.contains("\"checker-compat\""));
    assert!(text.contains("E<> L[0] == goal_M"));
}

#[test]
fn strict_mode_changes_the_encoding() {
    let dir = tempfile::tempdir().unwrap();
    let lenient = dir.path().join("lenient.json");
    let strict = dir.path().join("strict.json");
    let problem = fixture("rooms.json");
    let base = [
        "encode",
        "--problem",
        path(&problem),
        "--epsilon",
        "0",
        "--out",
    ];
    let out = taplan(&[&base[..], &[path(&lenient)]].concat());
    assert_eq!(out.status.code(), Some(0));
    let out = taplan(&[&base[..], &[path(&strict), "--strict-paper-ee-guard"]].concat());
    assert_eq!(out.status.code(), Some(0));
    assert_ne!(
        std::fs::read(&lenient).unwrap(),
        std::fs::read(&strict).unwrap()
    );
}

#[test]
fn witness_artifacts_replay_through_check_run() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run.json");
    let net = dir.path().join("net.json");
    let out = taplan(&[
        "witness",
        "--problem",
        path(&fixture("rooms.json")),
        "--plan",
        path(&fixture("rooms_valid.plan")),
        "--epsilon",
        "0",
        "--out",
        path(&run),
        "--net-out",
        path(&net),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let timeline = stdout(&out);
    assert!(timeline.contains("e1M"));
    assert!(timeline.contains("se   move_rb1_d_rm1_rm2"));

    let out = taplan(&["check-run", "--network", path(&net), "--run", path(&run)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("reaches goal_M: yes"));
}

#[test]
fn check_run_rejects_tampered_trace() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run.json");
    let net = dir.path().join("net.json");
    let out = taplan(&[
        "witness",
        "--problem",
        path(&fixture("tiny.json")),
        "--plan",
        path(&fixture("tiny.plan")),
        "--out",
        path(&run),
        "--net-out",
        path(&net),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let text = std::fs::read_to_string(&run).unwrap();
    let tampered = text.replacen("\"ps\": 1", "\"ps\": 2", 1);
    assert_ne!(text, tampered, "fixture must exercise the tamper");
    std::fs::write(&run, tampered).unwrap();
    let out = taplan(&["check-run", "--network", path(&net), "--run", path(&run)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("rejected"));
}

#[test]
fn witness_rejects_invalid_plan_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run.json");
    let out = taplan(&[
        "witness",
        "--problem",
        path(&fixture("rooms.json")),
        "--plan",
        path(&fixture("rooms_invalid.plan")),
        "--out",
        path(&run),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not valid"));
    assert!(!run.exists(), "no artifact for a failed witness");
}

#[test]
fn explore_finds_and_writes_a_replayable_run() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run.json");
    let net = dir.path().join("net.json");
    let out = taplan(&[
        "explore",
        "--problem",
        path(&fixture("tiny.json")),
        "--out",
        path(&run),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("found accepting run"));

    let out = taplan(&[
        "encode",
        "--problem",
        path(&fixture("tiny.json")),
        "--out",
        path(&net),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = taplan(&["check-run", "--network", path(&net), "--run", path(&run)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("reaches goal_M: yes"));
}

#[test]
fn explore_reports_not_found_with_exit_two() {
    let out = taplan(&[
        "explore",
        "--problem",
        path(&fixture("rooms.json")),
        "--max-steps",
        "4",
        "--max-configs",
        "500",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("not found <= budget"));
}

#[test]
fn explore_same_seed_same_run() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out_path in [&a, &b] {
        let out = taplan(&[
            "explore",
            "--problem",
            path(&fixture("tiny.json")),
            "--seed",
            "42",
            "--out",
            path(out_path),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn parse_failures_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{ not json").unwrap();

    let out = taplan(&[
        "validate",
        "--problem",
        path(&junk),
        "--plan",
        path(&fixture("tiny.plan")),
    ]);
    assert_eq!(out.status.code(), Some(64));
    assert!(stderr(&out).contains("line 1"));

    let bad_plan = dir.path().join("bad.plan");
    std::fs::write(&bad_plan, "1: (burn [2]\n").unwrap();
    let out = taplan(&[
        "validate",
        "--problem",
        path(&fixture("tiny.json")),
        "--plan",
        path(&bad_plan),
    ]);
    assert_eq!(out.status.code(), Some(64));
    assert!(stderr(&out).contains("line 1"));

    let out = taplan(&[
        "validate",
        "--problem",
        path(&fixture("tiny.json")),
        "--plan",
        path(&fixture("tiny.plan")),
        "--epsilon",
        "fast",
    ]);
    assert_eq!(out.status.code(), Some(64));

    let out = taplan(&["validate", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(64));

    let out = taplan(&[
        "validate",
        "--problem",
        path(&dir.path().join("missing.json")),
        "--plan",
        path(&fixture("tiny.plan")),
    ]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn resolution_failures_exit_65() {
    let dir = tempfile::tempdir().unwrap();
    let unknown_action = dir.path().join("unknown.plan");
    std::fs::write(&unknown_action, "1: (warp) [2]\n").unwrap();
    let out = taplan(&[
        "validate",
        "--problem",
        path(&fixture("tiny.json")),
        "--plan",
        path(&unknown_action),
    ]);
    assert_eq!(out.status.code(), Some(65));
    assert!(stderr(&out).contains("unknown action"));

    let inconsistent = dir.path().join("inconsistent.json");
    std::fs::write(
        &inconsistent,
        r#"{"props":["p"],"actions":[],"init":["ghost"],"goal":[]}"#,
    )
    .unwrap();
    let out = taplan(&[
        "validate",
        "--problem",
        path(&inconsistent),
        "--plan",
        path(&fixture("tiny.plan")),
    ]);
    assert_eq!(out.status.code(), Some(65));
    assert!(stderr(&out).contains("unknown proposition"));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(taplan(&["--help"]).status.code(), Some(0));
    assert_eq!(taplan(&["--version"]).status.code(), Some(0));
    assert_eq!(taplan(&["witness", "--help"]).status.code(), Some(0));
}
