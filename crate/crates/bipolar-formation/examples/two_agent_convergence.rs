//! Smallest possible closed loop: a static leader and the secondary leader
//! regulating its squared distance to it, starting well off target.
//!
//! Shows how the error enters a shrinking funnel and settles inside the
//! terminal band, and how to read the per-channel report of a finished run.
//!
//! Run with: cargo run --example two_agent_convergence

use bipolar_formation::prelude::*;

fn main() {
    // Start from the stock two-agent preset, but push agent 2 off target so
    // something actually happens (the preset starts at the exact fixed point).
    let mut scenario = Scenario::two_agents_static();
    scenario.name = "two_agent_convergence".into();
    scenario.initial_positions[1] = Vec2::new(-2.4, 0.7);
    scenario.horizon = 14.0;

    let desired = scenario.desired_formation().expect("valid shape");
    let e0 = scenario.initial_errors(&desired).expect("regular start");
    println!("initial squared-distance error: {:.4}", e0.e_d);

    // The funnel is selected from the initial state before the run starts.
    let channels = scenario.build_channels().expect("feasible start");
    println!(
        "distance funnel: e/rho(t) confined to (-{:.4}, {:.4})   [{}]",
        channels.distance.b_lower, channels.distance.b_upper, channels.distance.policy
    );
    let t_star = channels.distance.perf.time_to_reach(2.0 * channels.distance.perf.rho_inf);
    println!("envelope reaches twice its floor at t* = {t_star:.3} s\n");

    let result = run(&scenario).expect("valid scenario");
    assert!(result.failure.is_none(), "the error left its funnel: {:?}", result.failure);

    // Print the funnel history at a few instants.
    println!("{:>6}  {:>10}  {:>22}", "t", "e_d", "allowed interval");
    for row in result.log.rows.iter().filter(|r| (r.t * 2.0).fract() == 0.0 && r.t <= 8.0) {
        let s = &row.channels[0];
        println!("{:6.1}  {:10.5}  ({:10.5}, {:10.5})", row.t, s.e, s.lo, s.hi);
    }
    println!();
    print!("{}", result.summary);

    let final_dist = (result.log.rows.last().unwrap().positions[0]
        - result.log.rows.last().unwrap().positions[1])
        .norm();
    println!("\nfinal separation {:.6} (desired {})", final_dist, 1.5);
}
