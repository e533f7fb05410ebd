//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage or input errors, 2 when a
//! simulation (or the verification suite) fails. A failing run still writes
//! its partial artifacts before exiting.

use crate::scenario::Scenario;
use crate::{output, sim, verify};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

/// Verbosity from the `BIPOLAR_FORM_LOG` environment variable:
/// `off` (or `0`) silences progress output, `debug` (or `2`) adds detail,
/// anything else (including unset) means normal progress messages.
fn log_level() -> u8 {
    static LEVEL: OnceLock<u8> = OnceLock::new();
    *LEVEL.get_or_init(|| match std::env::var("BIPOLAR_FORM_LOG").as_deref() {
        Ok("off") | Ok("0") | Ok("quiet") => 0,
        Ok("debug") | Ok("2") => 2,
        _ => 1,
    })
}

macro_rules! info {
    ($($arg:tt)*) => { if log_level() >= 1 { eprintln!($($arg)*); } };
}

macro_rules! debug {
    ($($arg:tt)*) => { if log_level() >= 2 { eprintln!($($arg)*); } };
}

#[derive(Parser)]
#[command(
    name = "bipolar-form",
    version,
    about = "Deterministic planar formation-control simulator with funnel-bounded errors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write CSV/JSON/SVG artifacts.
    Run {
        /// Scenario JSON file, or a preset name (six_agent_maneuver,
        /// two_agents_static, random_henneberg).
        scenario: String,
        /// Output directory for the artifacts.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Field override `key=value`; repeatable. Keys: dt, horizon, seed,
        /// frame_seed, integrator, orientation_frame, name.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Cross-check the controller math against independent numerical oracles.
    Verify {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Multiplier on the Monte-Carlo sample counts.
        #[arg(long, default_value_t = 1.0)]
        samples: f64,
    },
    /// Write a ready-to-edit scenario file built from a preset.
    Scaffold {
        /// Preset name: six_agent_maneuver, two_agents_static,
        /// random_henneberg.
        preset: String,
        /// Destination JSON path.
        out: PathBuf,
        /// Agent count (random_henneberg only).
        #[arg(long, default_value_t = 6)]
        agents: usize,
        /// Generation seed (random_henneberg only).
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn load_scenario(spec: &str) -> Result<Scenario, String> {
    let path = Path::new(spec);
    if path.exists() || spec.ends_with(".json") {
        return Scenario::load(path);
    }
    build_preset(spec, 6, 7)
}

fn build_preset(name: &str, agents: usize, seed: u64) -> Result<Scenario, String> {
    match name {
        "six_agent_maneuver" => Ok(Scenario::six_agent_maneuver()),
        "two_agents_static" => Ok(Scenario::two_agents_static()),
        "random_henneberg" => Scenario::random_henneberg(agents, seed),
        other => Err(format!(
            "unknown preset '{other}' (expected six_agent_maneuver, two_agents_static, \
             or random_henneberg)"
        )),
    }
}

fn cmd_run(spec: &str, out: &Path, overrides: &[String]) -> i32 {
    let mut scenario = match load_scenario(spec) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    for kv in overrides {
        let Some((key, value)) = kv.split_once('=') else {
            eprintln!("error: override '{kv}' is not of the form key=value");
            return 1;
        };
        if let Err(e) = scenario.apply_override(key.trim(), value.trim()) {
            eprintln!("error: {e}");
            return 1;
        }
        debug!("override applied: {key} = {value}");
    }
    info!("running '{}' ({} agents, dt = {}, horizon = {})",
        scenario.name, scenario.agents, scenario.dt, scenario.horizon);
    let result = match sim::run(&scenario) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match output::write_run_artifacts(out, &result, &scenario) {
        Ok(paths) => {
            for p in &paths {
                debug!("wrote {}", p.display());
            }
            info!("artifacts written to {}", out.display());
        }
        Err(e) => {
            eprintln!("error: could not write artifacts to {}: {e}", out.display());
            return 1;
        }
    }
    print!("{}", result.summary);
    if let Some(failure) = &result.failure {
        eprintln!("run failed: {failure}");
        2
    } else {
        0
    }
}

fn cmd_verify(seed: u64, samples: f64) -> i32 {
    if !(samples > 0.0) || !samples.is_finite() {
        eprintln!("error: --samples must be a positive number");
        return 1;
    }
    info!("running verification suite (seed {seed}, sample factor {samples})");
    let report = verify::run_suite(seed, samples);
    print!("{report}");
    if report.all_passed() {
        0
    } else {
        2
    }
}

fn cmd_scaffold(preset: &str, out: &Path, agents: usize, seed: u64) -> i32 {
    let scenario = match build_preset(preset, agents, seed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let report = scenario.validate();
    if !report.is_ok() {
        eprintln!("error: preset produced an invalid scenario:\n{report}");
        return 2;
    }
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            if let Err(e) = std::fs::create_dir_all(parent) {
                eprintln!("error: could not create {}: {e}", parent.display());
                return 1;
            }
        }
    }
    if let Err(e) = scenario.save(out) {
        eprintln!("error: {e}");
        return 1;
    }
    println!("wrote scenario '{}' to {}", scenario.name, out.display());
    0
}

/// Parses `args` (excluding the program name is fine; `clap` handles both)
/// and executes the requested command, returning the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are successes, anything else is usage.
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match cli.command {
        Command::Run { scenario, out, set } => cmd_run(&scenario, &out, &set),
        Command::Verify { seed, samples } => cmd_verify(seed, samples),
        Command::Scaffold { preset, out, agents, seed } => {
            cmd_scaffold(&preset, &out, agents, seed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_lookup() {
        assert!(build_preset("six_agent_maneuver", 0, 0).is_ok());
        assert!(build_preset("two_agents_static", 0, 0).is_ok());
        assert!(build_preset("random_henneberg", 5, 1).is_ok());
        assert!(build_preset("warp_drive", 5, 1).is_err());
    }

    #[test]
    fn scaffold_then_run_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scn.json");
        assert_eq!(cmd_scaffold("two_agents_static", &path, 0, 0), 0);
        let loaded = Scenario::load(&path).unwrap();
        assert_eq!(loaded, Scenario::two_agents_static());
    }

    #[test]
    fn run_rejects_malformed_overrides() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(
            cmd_run("two_agents_static", dir.path(), &["dt0.5".to_string()]),
            1
        );
        assert_eq!(
            cmd_run("two_agents_static", dir.path(), &["mass=2".to_string()]),
            1
        );
    }

    #[test]
    fn missing_scenario_file_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(cmd_run("/nonexistent/path.json", dir.path(), &[]), 1);
    }
}
