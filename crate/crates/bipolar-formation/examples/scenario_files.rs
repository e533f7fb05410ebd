//! The file-based workflow: write a scenario to JSON, load it back, tweak
//! it with key=value overrides, run it, and inspect the artifacts.
//!
//! The same flow is available from the shipped binary:
//!
//!   bipolar-form scaffold two_agents_static scenario.json
//!   bipolar-form run scenario.json --out out/ --set dt=0.0005
//!   bipolar-form verify
//!
//! Run with: cargo run --example scenario_files

use bipolar_formation::output::write_run_artifacts;
use bipolar_formation::prelude::*;

fn main() {
    let dir = std::path::Path::new("out").join("scenario_files");
    std::fs::create_dir_all(&dir).expect("writable out dir");

    // Scaffold: a ready-to-edit file from a preset.
    let path = dir.join("two_agents.json");
    Scenario::two_agents_static().save(&path).expect("writable file");
    println!("wrote {}", path.display());

    // Load it back; the JSON round trip is bit-exact, including floats.
    let mut scenario = Scenario::load(&path).expect("readable scenario");
    assert_eq!(scenario, Scenario::two_agents_static());

    // Overrides use the same key=value grammar as the command line.
    scenario.apply_override("horizon", "2.5").expect("known key");
    scenario.apply_override("dt", "0.0005").expect("known key");
    scenario.apply_override("name", "two_agents_tweaked").expect("known key");

    // Validation separates hard violations from advisory warnings.
    let report = scenario.validate();
    assert!(report.is_ok(), "{report}");
    println!("validated '{}' ({} steps)", scenario.name, (scenario.horizon / scenario.dt) as u64);

    let result = run(&scenario).expect("valid scenario");
    let written = write_run_artifacts(&dir, &result, &scenario).expect("writable out dir");
    println!("artifacts:");
    for p in &written {
        println!("  {}", p.display());
    }

    // The CSV logs are plain RFC-4180: first line is the header, every row
    // is one logged instant.
    let csv = std::fs::read_to_string(dir.join("errors.csv")).expect("written above");
    let mut lines = csv.lines();
    println!("\nerrors.csv header: {}", lines.next().unwrap());
    println!("errors.csv first row: {}", lines.next().unwrap());
}
