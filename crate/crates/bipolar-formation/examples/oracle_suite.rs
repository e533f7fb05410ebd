//! Runs the full verification suite: every analytic ingredient of the
//! controller cross-checked against an independent numerical oracle.
//!
//! * target reconstruction must realize the shape data it was built from;
//! * the chart basis must match finite differences of the chart map;
//! * the closed-form measurement rates must match finite differences;
//! * the shape-loop gain must be strictly positive over a large sample;
//! * channel errors and positional deviation must bound each other
//!   near the target;
//! * the funnel gain must equal the transform slope over the envelope;
//! * the control law must be invariant to local frame rotations.
//!
//! Run with: cargo run --release --example oracle_suite

use bipolar_formation::verify::run_suite;

fn main() {
    let report = run_suite(2024, 1.0);
    print!("{report}");
    if !report.all_passed() {
        std::process::exit(2);
    }
}
