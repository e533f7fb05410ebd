//! Growing a triangulated formation one follower at a time.
//!
//! Starts from the leader pair and repeatedly anchors a new follower to an
//! existing edge, which keeps the directed graph minimally persistent: every
//! follower has exactly two neighbors, and the edge count stays at the
//! 2n - 3 minimum. Each growth step takes the two desired lengths and the
//! desired follower angle; here they are measured off a drawn placement, so
//! the triple is coherent by construction.
//!
//! Run with: cargo run --example henneberg_growth

use bipolar_formation::geometry::triangle_bipolar;
use bipolar_formation::graph::{henneberg_extend, validate_desired, validate_graph};
use bipolar_formation::oracles::{reconstruct_target_positions, strong_congruency_check};
use bipolar_formation::prelude::*;
use std::f64::consts::FRAC_PI_2;

fn main() {
    // Leader pair with a unit edge: leader at the origin, agent 2 below it.
    let mut graph = FormationGraph::leader_pair();
    let mut desired = DesiredFormation::leader_pair(1.0).expect("positive length");
    let mut targets = vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, -1.0)];

    // Each row anchors the next follower to the edge (j, i) and draws it at
    // an explicit point; the desired data is measured from that drawing.
    let placements: &[(usize, usize, Vec2)] = &[
        (1, 2, Vec2::new(0.9, -0.6)),  // follower 3 beside the leader pair
        (2, 3, Vec2::new(1.1, -1.5)),  // follower 4 below edge (3, 2)
        (3, 4, Vec2::new(2.0, -0.9)),  // follower 5 to the right
        (2, 4, Vec2::new(0.4, -2.3)),  // follower 6 at the bottom
    ];
    for &(i, j, point) in placements {
        let k = graph.n() + 1;
        let d_ki = (point - targets[i - 1]).norm();
        let d_kj = (point - targets[j - 1]).norm();
        // (log ratio, angle) of the placement relative to its two anchors.
        let bp = triangle_bipolar(targets[i - 1], targets[j - 1], point)
            .expect("non-degenerate placement");
        let (g, d) = henneberg_extend(&graph, &desired, i, j, d_ki, d_kj, bp.alpha)
            .expect("coherent growth step");
        graph = g;
        desired = d;
        targets.push(point);
        println!(
            "added follower {k}: anchors ({i}, {j}), lengths ({d_ki:.4}, {d_kj:.4}), \
             log ratio {:+.4}, angle {:.4}",
            bp.r, bp.alpha
        );
    }

    let graph_report = validate_graph(&graph);
    let shape_report = validate_desired(&graph, &desired);
    assert!(graph_report.is_ok() && shape_report.is_ok());
    println!(
        "\ngraph: {} agents, {} edges (minimum for persistence: {})",
        graph.n(),
        graph.edges().len(),
        2 * graph.n() - 3
    );

    // Realizing the shape data from scratch reproduces the drawing: the
    // reconstruction puts the leader at the origin and agent 2 straight
    // below, exactly our gauge.
    let rebuilt = reconstruct_target_positions(&graph, &desired, Vec2::ZERO, FRAC_PI_2)
        .expect("realizable shape");
    let worst = targets
        .iter()
        .zip(&rebuilt)
        .map(|(a, b)| (*a - *b).norm())
        .fold(0.0f64, f64::max);
    println!("reconstruction reproduces the drawn placement to {worst:.2e}");
    assert!(worst < 1e-9);
    assert!(strong_congruency_check(&rebuilt, &graph, &desired, 1e-9));

    // The same construction is available as a seeded one-liner, runnable
    // end to end.
    let scenario = Scenario::random_henneberg(8, 20260815).expect("feasible growth");
    let path = std::path::Path::new("out").join("random_henneberg.json");
    std::fs::create_dir_all(path.parent().unwrap()).expect("writable out dir");
    scenario.save(&path).expect("writable file");
    println!("\nsaved a seeded 8-agent scenario to {}", path.display());

    let mut short = scenario.clone();
    short.horizon = 2.0;
    let result = run(&short).expect("valid scenario");
    assert!(result.failure.is_none());
    println!(
        "simulated 2 s of it: min neighbor distance {:.3}, all funnels held",
        result.summary.min_neighbor_distance
    );
}
