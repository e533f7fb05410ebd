//! Tour of the two-center coordinate chart a follower steers in.
//!
//! A follower with anchors i and j measures a log distance ratio
//! r = ln(|p_ki| / |p_kj|) and the counterclockwise angle alpha between its
//! two anchor bearings. The pair (r, alpha) is an orthogonal curvilinear
//! chart of the plane (minus the two anchor points): level curves of r are
//! circles around the anchors (Apollonius circles), level curves of alpha
//! are circular arcs through both anchors, and they always cross at right
//! angles. Both families share one scale factor, so moving the follower by
//! q * dr along the r direction changes r by dr, and likewise for alpha.
//!
//! Run with: cargo run --example bipolar_coordinates

use bipolar_formation::geometry::{
    bipolar_basis, bipolar_to_cartesian, scale_factor, triangle_bipolar, BipolarPoint, EdgeFrame,
};
use bipolar_formation::oracles::check_basis_by_finite_difference;
use bipolar_formation::prelude::*;
use std::f64::consts::PI;

fn main() {
    // Anchors of the chart: i on the left, j on the right, 2c apart.
    let p_i = Vec2::new(-1.0, 0.0);
    let p_j = Vec2::new(1.0, 0.0);

    println!("anchors at {:?} and {:?}\n", (p_i.x, p_i.y), (p_j.x, p_j.y));

    // Forward and back: draw a point, measure its chart coordinates,
    // rebuild the point from them.
    println!(
        "{:>20}  {:>8} {:>8}  {:>22}",
        "point", "r", "alpha", "rebuilt"
    );
    for point in [
        Vec2::new(0.0, 1.0),
        Vec2::new(0.5, 0.8),
        Vec2::new(-0.4, -1.2),
        Vec2::new(2.0, 0.5),
    ] {
        let bp = triangle_bipolar(p_i, p_j, point).expect("off the axis");
        let frame = EdgeFrame::from_foci(p_i, p_j).expect("distinct anchors");
        let rebuilt = frame.to_global(bipolar_to_cartesian(&bp).expect("regular"));
        println!(
            "({:6.2}, {:6.2})      {:8.4} {:8.4}  ({:8.4}, {:8.4})",
            point.x, point.y, bp.r, bp.alpha, rebuilt.x, rebuilt.y
        );
        assert!((rebuilt - point).norm() < 1e-12);
    }

    // The chart directions at a point, expressed through the anchor-pair
    // bearing. Both unit vectors and the shared scale factor come in closed
    // form; a quarter turn maps one onto the other (orthogonality).
    let (r, alpha, c) = (0.3, 2.0 * PI / 3.0, 1.0);
    let z_ji = Vec2::new(-1.0, 0.0); // bearing from anchor j toward anchor i
    let basis = bipolar_basis(r, alpha, z_ji).expect("regular chart point");
    let q = scale_factor(&BipolarPoint { r, alpha, c }).expect("regular chart point");
    println!("\nat (r, alpha) = ({r}, {alpha:.4}):");
    println!("  ratio direction  ({:+.4}, {:+.4})", basis.r_hat.x, basis.r_hat.y);
    println!("  angle direction  ({:+.4}, {:+.4})", basis.alpha_hat.x, basis.alpha_hat.y);
    println!("  scale factor     {q:.4}");
    assert!(basis.r_hat.dot(basis.alpha_hat).abs() < 1e-12);
    assert!((basis.r_hat - basis.alpha_hat.rot90()).norm() < 1e-12);

    // Independent evidence: nudge (r, alpha) numerically and compare the
    // displacement against the analytic directions times the scale factor.
    let dev = check_basis_by_finite_difference(r, alpha, c, 1e-6).expect("regular");
    println!("  finite-difference deviation of the basis: {dev:.2e}");
    assert!(dev < 1e-8);

    // Why the follower uses this chart: its control directions decouple.
    // Pushing along the ratio direction changes only r, pushing along the
    // angle direction changes only alpha, and equal chart-speed motions
    // need equal physical speed in both directions.
    println!("\nchart displacement per unit physical displacement: {:.4} (both axes)", 1.0 / q);
}
