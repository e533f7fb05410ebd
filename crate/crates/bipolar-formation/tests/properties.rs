//! Randomized property tests for the geometric chart, the barrier
//! transform, band selection, graph growth, and reference schedules.

use std::f64::consts::{PI, TAU};

use bipolar_formation::geometry::{
    bipolar_basis, bipolar_to_cartesian, edge_angle, log_ratio, reconstruct_neighbor_bearing,
    scale_factor, triangle_bipolar, BipolarPoint, EdgeFrame,
};
use bipolar_formation::graph::{
    henneberg_extend, validate_desired, DesiredFormation, FormationGraph,
};
use bipolar_formation::oracles::{reconstruct_target_positions, strong_congruency_check};
use bipolar_formation::ppc::{
    select_bounds_angle, select_bounds_bearing, select_bounds_distance, select_bounds_ratio,
    PerformanceFunction, PpcChannel,
};
use bipolar_formation::schedule::{Knot, ScalarSchedule, SinTerm, Vec2Schedule, Wave};
use bipolar_formation::vec2::Vec2;
use proptest::prelude::*;

fn unit(theta: f64) -> Vec2 {
    Vec2::new(theta.cos(), theta.sin())
}

/// A triangle (i, j, k) whose interior chart is comfortably non-singular:
/// all sides above 0.3 and the angle at k at least 0.1 away from the cut.
fn sturdy_triangle() -> impl Strategy<Value = (Vec2, Vec2, Vec2)> {
    (
        -4.0..4.0f64,
        -4.0..4.0f64,
        -4.0..4.0f64,
        -4.0..4.0f64,
        -4.0..4.0f64,
        -4.0..4.0f64,
    )
        .prop_map(|(ax, ay, bx, by, cx, cy)| {
            (Vec2::new(ax, ay), Vec2::new(bx, by), Vec2::new(cx, cy))
        })
        .prop_filter("sides too short or angle too close to the cut", |(pi, pj, pk)| {
            let sides =
                [(*pi - *pj).norm(), (*pi - *pk).norm(), (*pj - *pk).norm()];
            if sides.iter().any(|s| *s < 0.3) {
                return false;
            }
            let z_ki = (*pi - *pk) / (*pi - *pk).norm();
            let z_kj = (*pj - *pk) / (*pj - *pk).norm();
            match edge_angle(z_ki, z_kj) {
                Ok(a) => a > 0.1 && a < TAU - 0.1,
                Err(_) => false,
            }
        })
}

proptest! {
    /// Measuring a triangle in bipolar coordinates and mapping the
    /// coordinates back through the focal frame reproduces the vertex.
    #[test]
    fn bipolar_round_trip((p_i, p_j, p_k) in sturdy_triangle()) {
        let bp = triangle_bipolar(p_i, p_j, p_k).unwrap();
        let local = bipolar_to_cartesian(&bp).unwrap();
        let frame = EdgeFrame::from_foci(p_i, p_j).unwrap();
        let back = frame.to_global(local);
        prop_assert!((back - p_k).norm() < 1e-9,
            "round trip drifted by {}", (back - p_k).norm());
    }

    /// The chart basis is orthonormal, right-handed, and its components
    /// satisfy f1^2 + f2^2 = 1 everywhere on the chart.
    #[test]
    fn basis_orthonormal(
        r in -2.5..2.5f64,
        alpha in 0.2..(TAU - 0.2),
        theta in -PI..PI,
    ) {
        let basis = bipolar_basis(r, alpha, unit(theta)).unwrap();
        prop_assert!((basis.f1 * basis.f1 + basis.f2 * basis.f2 - 1.0).abs() < 1e-12);
        prop_assert!((basis.alpha_hat.norm() - 1.0).abs() < 1e-12);
        prop_assert!((basis.r_hat.norm() - 1.0).abs() < 1e-12);
        prop_assert!(basis.r_hat.dot(basis.alpha_hat).abs() < 1e-12);
        // Right-handed: rotating alpha_hat by +pi/2 gives r_hat.
        prop_assert!((basis.r_hat - basis.alpha_hat.rot90()).norm() < 1e-12);
    }

    /// The interior angle is invariant under a common rotation of both
    /// measured bearings and always lands in [0, 2*pi).
    #[test]
    fn edge_angle_rotation_invariant(
        a in -PI..PI,
        b in -PI..PI,
        theta in -TAU..TAU,
    ) {
        let z_ki = unit(a);
        let z_kj = unit(b);
        prop_assume!(z_ki.dot(z_kj).abs() < 0.9999);
        let alpha = edge_angle(z_ki, z_kj).unwrap();
        let alpha_rot = edge_angle(z_ki.rotated(theta), z_kj.rotated(theta)).unwrap();
        prop_assert!((0.0..TAU).contains(&alpha));
        prop_assert!((alpha - alpha_rot).abs() < 1e-9,
            "angle changed under rotation: {alpha} vs {alpha_rot}");
    }

    /// Swapping the two legs reflects the angle: alpha(ki, kj) + alpha(kj, ki)
    /// is a full turn, and the log ratio flips sign.
    #[test]
    fn edge_measurements_antisymmetric((p_i, p_j, p_k) in sturdy_triangle()) {
        let z_ki = (p_i - p_k) / (p_i - p_k).norm();
        let z_kj = (p_j - p_k) / (p_j - p_k).norm();
        let a_ij = edge_angle(z_ki, z_kj).unwrap();
        let a_ji = edge_angle(z_kj, z_ki).unwrap();
        prop_assert!((a_ij + a_ji - TAU).abs() < 1e-9);
        let d_ki = (p_i - p_k).norm();
        let d_kj = (p_j - p_k).norm();
        let r = log_ratio(d_ki, d_kj).unwrap();
        let r_swapped = log_ratio(d_kj, d_ki).unwrap();
        prop_assert!((r + r_swapped).abs() < 1e-12);
    }

    /// An observer at k can recover the bearing between its two neighbors
    /// from its own two bearings and the distance ratio alone.
    #[test]
    fn neighbor_bearing_reconstruction((p_i, p_j, p_k) in sturdy_triangle()) {
        let z_ki = (p_i - p_k) / (p_i - p_k).norm();
        let z_kj = (p_j - p_k) / (p_j - p_k).norm();
        let ratio = (p_i - p_k).norm() / (p_j - p_k).norm();
        let z = reconstruct_neighbor_bearing(z_ki, z_kj, ratio).unwrap();
        let truth = (p_i - p_j) / (p_i - p_j).norm();
        prop_assert!((z - truth).norm() < 1e-9,
            "reconstructed bearing off by {}", (z - truth).norm());
    }

    /// The chart's scale factor is positive wherever the chart is defined.
    #[test]
    fn scale_factor_positive(
        r in -3.0..3.0f64,
        alpha in 0.05..(TAU - 0.05),
        c in 0.1..4.0f64,
    ) {
        let q = scale_factor(&BipolarPoint::new(r, alpha, c)).unwrap();
        prop_assert!(q > 0.0 && q.is_finite());
    }

    /// The barrier transform is a strictly increasing bijection from the
    /// open band onto the reals, fixed at zero, with positive slope factor.
    #[test]
    fn barrier_transform_bijection(
        b_lower in 0.3..6.0f64,
        b_upper in 0.3..6.0f64,
        u in -0.95..0.95f64,
        v in -0.95..0.95f64,
        rho_t in 0.05..1.0f64,
    ) {
        let perf = PerformanceFunction::new(0.5, 0.04).unwrap();
        let ch = PpcChannel::new(perf, b_lower, b_upper).unwrap();
        let span = |w: f64| if w >= 0.0 { w * b_upper } else { w * b_lower };
        let e1 = span(u);
        let e2 = span(v);
        prop_assert!(ch.transform(0.0).unwrap().abs() < 1e-12);
        let s1 = ch.transform(e1).unwrap();
        prop_assert!((ch.inverse_transform(s1) - e1).abs() < 1e-9 * (1.0 + e1.abs()));
        if e2 - e1 > 1e-6 {
            prop_assert!(ch.transform(e2).unwrap() > s1);
        }
        prop_assert!(ch.xi(e1, rho_t).unwrap() > 0.0);
    }

    /// The performance envelope decays monotonically from 1 toward its
    /// floor and never crosses it.
    #[test]
    fn envelope_monotone(
        l in 0.05..3.0f64,
        rho_inf in 0.01..0.9f64,
        t1 in 0.0..20.0f64,
        dt in 0.001..10.0f64,
    ) {
        let perf = PerformanceFunction::new(l, rho_inf).unwrap();
        prop_assert!((perf.rho(0.0) - 1.0).abs() < 1e-12);
        let (a, b) = (perf.rho(t1), perf.rho(t1 + dt));
        prop_assert!(b <= a);
        prop_assert!(b >= rho_inf);
        // Strict decrease holds whenever the envelope is not yet saturated
        // at its floor to machine precision.
        if a - rho_inf > 1e-12 {
            prop_assert!(b < a);
        }
        prop_assert!(perf.rho_dot(t1) < 0.0);
    }

    /// Every band-selection rule that accepts an initial error returns a
    /// band that strictly contains it at t = 0.
    #[test]
    fn selected_bands_contain_start(
        e0 in -8.0..8.0f64,
        alpha_star in 0.15..(TAU - 0.15),
        beta_star in -2.0..2.0f64,
        d_star in 0.3..4.0f64,
    ) {
        let perf = PerformanceFunction::new(0.5, 0.05).unwrap();

        let ratio = select_bounds_ratio(perf, e0);
        prop_assert!(ratio.contains(e0));
        prop_assert!(ratio.b_lower >= 1.0 && ratio.b_upper >= 1.0);

        if let Ok(ch) = select_bounds_angle(alpha_star, perf, e0) {
            prop_assert!(ch.contains(e0));
            prop_assert!((ch.b_lower + ch.b_upper - TAU).abs() < 1e-12);
        }

        if let Ok(ch) = select_bounds_distance(|_| d_star, perf, 10.0, e0) {
            prop_assert!(ch.contains(e0));
            // The funnel floor never dips below the hard constraint
            // |p|^2 > 0, i.e. b_lower * rho(t) <= d*^2 for all t.
            for k in 0..=100 {
                let t = 0.1 * k as f64;
                prop_assert!(ch.b_lower * ch.rho(t) <= d_star * d_star + 1e-9);
            }
        }

        if let Ok(ch) = select_bounds_bearing(|_| beta_star, perf, 10.0, e0) {
            prop_assert!(ch.contains(e0));
            // The funnel stays inside the principal branch of the bearing.
            for k in 0..=100 {
                let t = 0.1 * k as f64;
                let (lo, hi) = ch.band_at(t);
                prop_assert!(beta_star + lo > -PI - 1e-9);
                prop_assert!(beta_star + hi < PI + 1e-9);
            }
        }
    }
}

/// Grows a chain of followers onto the leader pair by placing points
/// geometrically, measuring their (d_ki, d_kj, alpha) triple, and feeding it
/// through the growth operation. The grown shape must validate and its
/// reconstruction must reproduce the drawn points.
fn grow_and_check(offsets: Vec<(f64, f64)>) -> Result<(), TestCaseError> {
    let mut points = vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, -1.5)];
    let mut graph = FormationGraph::new(2, vec![(2, 1)]);
    let mut desired = DesiredFormation::from_parts(
        std::iter::once(((2usize, 1usize), 1.5f64)).collect(),
        Default::default(),
        Default::default(),
    );

    for (idx, (dx, dy)) in offsets.iter().enumerate() {
        let k = points.len() + 1;
        // Anchor on the two most recent points so the chain stays local.
        let i = k - 2;
        let j = k - 1;
        let anchor_mid = 0.5 * (points[i - 1] + points[j - 1]);
        let candidate = anchor_mid + Vec2::new(*dx, *dy);
        let bp = match triangle_bipolar(points[i - 1], points[j - 1], candidate) {
            Ok(bp) => bp,
            Err(_) => return Ok(()), // degenerate draw; vacuous case
        };
        if bp.alpha < 0.15 || bp.alpha > TAU - 0.15 || bp.r.abs() > 2.0 {
            return Ok(());
        }
        let d_ki = (candidate - points[i - 1]).norm();
        let d_kj = (candidate - points[j - 1]).norm();
        if d_ki < 0.3 || d_kj < 0.3 {
            return Ok(());
        }
        let (g, d) = henneberg_extend(&graph, &desired, i, j, d_ki, d_kj, bp.alpha)
            .map_err(|e| {
                TestCaseError::fail(format!("coherent growth step {idx} rejected: {e}"))
            })?;
        graph = g;
        desired = d;
        points.push(candidate);
    }

    let report = validate_desired(&graph, &desired);
    prop_assert!(report.is_ok(), "grown formation invalid: {:?}", report.violations);

    // The drawn chain has bearing z_21 = +pi/2 (agent 2 sits straight below
    // agent 1), so reconstructing with that direction must reproduce it.
    let rebuilt =
        reconstruct_target_positions(&graph, &desired, points[0], std::f64::consts::FRAC_PI_2)
            .unwrap();
    for (a, b) in rebuilt.iter().zip(points.iter()) {
        prop_assert!((*a - *b).norm() < 1e-9,
            "reconstruction drifted by {}", (*a - *b).norm());
    }
    prop_assert!(strong_congruency_check(&points, &graph, &desired, 1e-9),
        "drawn points not congruent with their own measurements");
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Coherent vertex addition always yields a valid formation whose
    /// reconstruction reproduces the generating placement.
    #[test]
    fn henneberg_growth_closure(
        offsets in proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..5)
    ) {
        grow_and_check(offsets)?;
    }
}

fn sin_terms() -> impl Strategy<Value = Vec<SinTerm>> {
    proptest::collection::vec(
        (0.1..2.0f64, 0.1..3.0f64, -PI..PI, proptest::bool::ANY).prop_map(
            |(amplitude, omega, phase, is_sin)| SinTerm {
                amplitude,
                omega,
                phase,
                wave: if is_sin { Wave::Sin } else { Wave::Cos },
            },
        ),
        1..4,
    )
}

fn central_difference(s: &ScalarSchedule, t: f64, h: f64) -> f64 {
    (s.eval(t + h) - s.eval(t - h)) / (2.0 * h)
}

proptest! {
    /// Analytic schedule derivatives agree with central differences.
    #[test]
    fn schedule_derivative_matches_finite_difference(
        terms in sin_terms(),
        offset in -2.0..2.0f64,
        plateau in -1.5..1.5f64,
        t in 0.5..25.0f64,
    ) {
        let h = 1e-5;
        let tol = 1e-5;

        let wave = ScalarSchedule::Sinusoids { offset, terms };
        prop_assert!((wave.deriv(t) - central_difference(&wave, t, h)).abs() < tol);

        let steps = ScalarSchedule::PiecewiseSmooth {
            knots: vec![
                Knot { t: 1.0, value: offset },
                Knot { t: 9.0, value: plateau },
                Knot { t: 14.0, value: offset + 0.5 },
                Knot { t: 22.0, value: plateau - 0.25 },
            ],
        };
        prop_assert!((steps.deriv(t) - central_difference(&steps, t, h)).abs() < tol);

        // Heading of a forward-dominated velocity: |y| <= 0.7 x keeps the
        // heading well inside the principal branch.
        let heading = ScalarSchedule::HeadingTracking {
            velocity: Box::new(Vec2Schedule {
                x: ScalarSchedule::constant(1.25),
                y: ScalarSchedule::Sinusoids {
                    offset: 0.0,
                    terms: vec![SinTerm {
                        amplitude: 0.6,
                        omega: 0.8,
                        phase: offset,
                        wave: Wave::Cos,
                    }],
                },
            }),
            offset: plateau * 0.3,
            ramp_start: 2.0,
            ramp_end: 5.0,
        };
        prop_assert!(heading.validate().is_ok());
        prop_assert!(
            (heading.deriv(t) - central_difference(&heading, t, h)).abs() < tol
        );
    }
}
