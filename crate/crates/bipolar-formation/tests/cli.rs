//! End-to-end tests of the command-line binary: exit codes, artifact
//! layout, cross-process determinism, and logging control.

use std::path::Path;
use std::process::{Command, Output};

use bipolar_formation::scenario::Scenario;

const BIN: &str = env!("CARGO_BIN_EXE_bipolar-form");

fn bipolar_form(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("BIPOLAR_FORM_LOG")
        .output()
        .expect("binary should spawn")
}

fn artifact_names() -> [&'static str; 5] {
    ["trajectory.csv", "errors.csv", "summary.json", "paths.svg", "funnels.svg"]
}

fn assert_artifacts(dir: &Path) {
    for name in artifact_names() {
        let p = dir.join(name);
        assert!(p.is_file(), "missing artifact {}", p.display());
        assert!(p.metadata().unwrap().len() > 0, "empty artifact {}", p.display());
    }
}

#[test]
fn run_preset_writes_artifacts_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let result = bipolar_form(&[
        "run",
        "two_agents_static",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "horizon=2",
    ]);
    assert_eq!(result.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    assert_artifacts(&out);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["scenario"], "two_agents_static");
    assert!(summary["failure"].is_null());
    assert_eq!(summary["steps_completed"], 2000);

    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("two_agents_static"), "summary not printed: {stdout}");
}

#[test]
fn identical_invocations_write_identical_logs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let result = bipolar_form(&[
            "run",
            "two_agents_static",
            "--out",
            out.to_str().unwrap(),
            "--set",
            "horizon=2",
        ]);
        assert_eq!(result.status.code(), Some(0));
    }
    for name in ["trajectory.csv", "errors.csv", "summary.json"] {
        let bytes_a = std::fs::read(a.join(name)).unwrap();
        let bytes_b = std::fs::read(b.join(name)).unwrap();
        if name == "summary.json" {
            // Wall-clock time legitimately differs; everything else must not.
            let mut va: serde_json::Value =
                serde_json::from_slice(&bytes_a).unwrap();
            let mut vb: serde_json::Value =
                serde_json::from_slice(&bytes_b).unwrap();
            va["wall_clock_seconds"] = 0.into();
            vb["wall_clock_seconds"] = 0.into();
            assert_eq!(va, vb, "summaries differ beyond wall time");
        } else {
            assert_eq!(bytes_a, bytes_b, "{name} differs between identical runs");
        }
    }
}

#[test]
fn coarse_time_step_fails_with_exit_two_and_partial_log() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("coarse");
    let result = bipolar_form(&[
        "run",
        "six_agent_maneuver",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "dt=0.5",
    ]);
    assert_eq!(result.status.code(), Some(2), "coarse run should report failure");
    // The partial trace up to the violation is still written out.
    assert_artifacts(&out);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap())
            .unwrap();
    assert!(summary["failure"].is_string(), "summary should carry the failure");
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("run failed"), "stderr was: {stderr}");
}

#[test]
fn scaffold_presets_produce_loadable_valid_scenarios() {
    let tmp = tempfile::tempdir().unwrap();
    for preset in ["two_agents_static", "six_agent_maneuver", "random_henneberg"] {
        let path = tmp.path().join(format!("{preset}.json"));
        let result = bipolar_form(&[
            "scaffold",
            preset,
            path.to_str().unwrap(),
            "--agents",
            "5",
            "--seed",
            "42",
        ]);
        assert_eq!(
            result.status.code(),
            Some(0),
            "scaffold {preset} failed: {}",
            String::from_utf8_lossy(&result.stderr)
        );
        let scenario = Scenario::load(&path).expect("scaffolded file should load");
        let report = scenario.validate();
        assert!(report.is_ok(), "{preset} scaffolded invalid scenario: {report}");
    }
}

#[test]
fn scaffold_rejects_unknown_preset() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("x.json");
    let result = bipolar_form(&["scaffold", "no_such_preset", path.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    assert!(!path.exists());
}

#[test]
fn run_rejects_missing_scenario_file() {
    let tmp = tempfile::tempdir().unwrap();
    let result = bipolar_form(&[
        "run",
        "/nonexistent/scenario.json",
        "--out",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn run_accepts_scenario_file_round_tripped_through_scaffold() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("scenario.json");
    let scaffold = bipolar_form(&["scaffold", "two_agents_static", path.to_str().unwrap()]);
    assert_eq!(scaffold.status.code(), Some(0));

    let out = tmp.path().join("out");
    let result = bipolar_form(&[
        "run",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--set",
        "horizon=1.5",
    ]);
    assert_eq!(result.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    assert_artifacts(&out);
}

#[test]
fn malformed_overrides_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    for bad in ["dt", "unknown_key=1", "dt=abc"] {
        let result = bipolar_form(&[
            "run",
            "two_agents_static",
            "--out",
            out.to_str().unwrap(),
            "--set",
            bad,
        ]);
        assert_eq!(result.status.code(), Some(1), "override '{bad}' should be rejected");
    }
}

#[test]
fn usage_errors_exit_one() {
    let result = bipolar_form(&["frobnicate"]);
    assert_eq!(result.status.code(), Some(1));
    let result = bipolar_form(&["run"]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn verify_subcommand_reports_checks_and_exits_zero() {
    let result = bipolar_form(&["verify", "--samples", "0.05", "--seed", "7"]);
    assert_eq!(result.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("PASS"), "verify output: {stdout}");
    assert!(!stdout.contains("FAIL"), "verify output: {stdout}");
}

#[test]
fn log_env_variable_controls_progress_output() {
    let tmp = tempfile::tempdir().unwrap();

    let quiet = Command::new(BIN)
        .args([
            "run",
            "two_agents_static",
            "--out",
            tmp.path().join("quiet").to_str().unwrap(),
            "--set",
            "horizon=1",
        ])
        .env("BIPOLAR_FORM_LOG", "off")
        .output()
        .unwrap();
    assert_eq!(quiet.status.code(), Some(0));
    assert!(
        quiet.stderr.is_empty(),
        "quiet mode still wrote to stderr: {}",
        String::from_utf8_lossy(&quiet.stderr)
    );

    let chatty = Command::new(BIN)
        .args([
            "run",
            "two_agents_static",
            "--out",
            tmp.path().join("chatty").to_str().unwrap(),
            "--set",
            "horizon=1",
        ])
        .env("BIPOLAR_FORM_LOG", "debug")
        .output()
        .unwrap();
    assert_eq!(chatty.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&chatty.stderr);
    assert!(stderr.contains("override applied"), "debug log missing: {stderr}");
}
