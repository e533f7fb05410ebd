//! The funnel machinery on its own: envelopes, the unconstraining
//! transform, and the per-channel band-selection rules.
//!
//! Every controlled error e(t) must stay inside a shrinking funnel
//! (-b_lower * rho(t), b_upper * rho(t)) with rho(t) decaying exponentially
//! from 1 to its floor. Controllers never act on e directly; they act on
//! the transformed error sigma = T(e / rho), which blows up at the funnel
//! edges, so bounded sigma is the same thing as guaranteed containment.
//!
//! Run with: cargo run --example performance_bounds

use bipolar_formation::ppc::{
    select_bounds_angle, select_bounds_bearing, select_bounds_distance, select_bounds_ratio,
    PerformanceFunction, PpcChannel,
};
use std::f64::consts::PI;

fn main() {
    let perf = PerformanceFunction::new(0.5, 0.04).expect("valid envelope");
    println!("envelope rho(t) = (1 - 0.04) exp(-0.5 t) + 0.04:");
    for t in [0.0, 2.0, 6.0, 12.0, 30.0] {
        println!("  rho({t:4}) = {:.5}", perf.rho(t));
    }
    let t_star = perf.time_to_reach(2.0 * perf.rho_inf);
    println!("  reaches twice its floor at t* = {t_star:.3} s\n");

    // The transform and its inverse on an asymmetric band.
    let channel = PpcChannel::new(perf, 1.0, 4.0).expect("valid band");
    println!("transform on the band (-1, 4):");
    for e_tilde in [-0.9, -0.5, 0.0, 2.0, 3.9] {
        let sigma = channel.transform(e_tilde).expect("inside the band");
        let back = channel.inverse_transform(sigma);
        println!(
            "  T({e_tilde:5.2}) = {sigma:8.4}   T^-1 back: {back:8.4}   gain xi: {:8.4}",
            channel.xi(e_tilde, 1.0).expect("inside the band")
        );
        assert!((back - e_tilde).abs() < 1e-12);
    }
    println!("  T(0) = 0 exactly, and T explodes toward the edges -1 and 4\n");

    // Band selection per channel kind, from the state at t = 0.
    // Distance: the lower edge must keep the squared distance positive for
    // every point of the desired-separation schedule.
    let d_star = |t: f64| if (16.0..26.0).contains(&t) { 1.25 } else { 1.875 };
    let e_d0 = 3.05;
    let dist = select_bounds_distance(d_star, perf, 40.0, e_d0).expect("feasible start");
    println!("distance channel, e(0) = {e_d0}:");
    println!("  band (-{:.4}, {:.4})   [{}]", dist.b_lower, dist.b_upper, dist.policy);

    // Log ratio: unconstrained sign, so a symmetric band with a factor-two
    // margin over the initial error always works.
    let ratio = select_bounds_ratio(perf, -0.23);
    println!("ratio channel, e(0) = -0.23:");
    println!("  band (-{:.4}, {:.4})   [{}]", ratio.b_lower, ratio.b_upper, ratio.policy);

    // Interior angle: the funnel at t = 0 is exactly the chart domain
    // (0, 2 pi) around the desired angle.
    let angle = select_bounds_angle(PI / 3.0, perf, 1.1).expect("angle in range");
    println!("angle channel, target pi/3, e(0) = 1.1:");
    println!("  band (-{:.4}, {:.4})   [{}]", angle.b_lower, angle.b_upper, angle.policy);

    // Bearing: the funnel must stay inside the principal branch (-pi, pi]
    // around the scheduled reference.
    let beta_star = |t: f64| 0.3 * (0.2 * t).sin();
    let bearing = select_bounds_bearing(beta_star, perf, 40.0, 0.8).expect("feasible start");
    println!("bearing channel, reference 0.3 sin(0.2 t), e(0) = 0.8:");
    println!("  band (-{:.4}, {:.4})   [{}]", bearing.b_lower, bearing.b_upper, bearing.policy);

    // Infeasible initial states are rejected up front, not mid-run.
    let near_collision = select_bounds_distance(|_| 1.875, perf, 40.0, -3.5156);
    println!("\nstarting at the collision point: {}", near_collision.unwrap_err());
}
