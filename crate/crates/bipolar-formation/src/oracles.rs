//! Independent cross-checks of the geometric and dynamic identities the
//! controllers rely on, built from first principles (finite differences,
//! brute-force sampling, direct reconstruction) rather than from the code
//! under test.

use crate::geometry::{
    bearing, bipolar_basis, bipolar_to_cartesian, edge_angle, scale_factor, triangle_bipolar,
    BipolarPoint, EdgeFrame, GeometryError,
};
use crate::graph::{DesiredFormation, FormationGraph};
use crate::vec2::Vec2;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("reconstructed edge ({j}, {i}) has length {got}, desired {want}")]
    ReconstructionMismatch { j: usize, i: usize, got: f64, want: f64 },
    #[error("missing desired data for {0}")]
    MissingDesired(String),
}

/// Places every agent of a desired shape explicitly: the leader at `p1`, the
/// secondary leader so that its bearing toward the leader is `p2_dir`, and
/// each follower through the bipolar chart of its anchors. Checks that every
/// desired edge length is achieved to 1e-9 before returning.
pub fn reconstruct_target_positions(
    graph: &FormationGraph,
    desired: &DesiredFormation,
    p1: Vec2,
    p2_dir: f64,
) -> Result<Vec<Vec2>, OracleError> {
    let n = graph.n();
    let d21 = desired
        .distance(2, 1)
        .ok_or_else(|| OracleError::MissingDesired("edge (2, 1) length".into()))?;
    let mut positions = vec![Vec2::ZERO; n];
    positions[0] = p1;
    // Bearing from 2 to 1 must equal p2_dir, so 2 sits on the opposite ray.
    positions[1] = p1 + d21 * Vec2::new((p2_dir + std::f64::consts::PI).cos(),
                                        (p2_dir + std::f64::consts::PI).sin());
    for k in graph.followers() {
        let (i, j) = graph
            .follower_anchors(k)
            .ok_or_else(|| OracleError::MissingDesired(format!("anchors of follower {k}")))?;
        let r_star = desired
            .ratio(k)
            .ok_or_else(|| OracleError::MissingDesired(format!("ratio of follower {k}")))?;
        let alpha_star = desired
            .angle(k)
            .ok_or_else(|| OracleError::MissingDesired(format!("angle of follower {k}")))?;
        let frame = EdgeFrame::from_foci(positions[i - 1], positions[j - 1])?;
        let local =
            bipolar_to_cartesian(&BipolarPoint { r: r_star, alpha: alpha_star, c: frame.c })?;
        positions[k - 1] = frame.to_global(local);
    }
    for &(j, i) in graph.edges() {
        let want = desired
            .distance(j, i)
            .ok_or_else(|| OracleError::MissingDesired(format!("edge ({j}, {i}) length")))?;
        let got = (positions[j - 1] - positions[i - 1]).norm();
        if (got - want).abs() > 1e-9 * want.max(1.0) {
            return Err(OracleError::ReconstructionMismatch { j, i, got, want });
        }
    }
    Ok(positions)
}

/// True when `positions` realizes the desired shape up to `tol`: every edge
/// length and every follower angle (hence chirality) matches. Mirror images
/// fail the angle comparison.
pub fn strong_congruency_check(
    positions: &[Vec2],
    graph: &FormationGraph,
    desired: &DesiredFormation,
    tol: f64,
) -> bool {
    for &(j, i) in graph.edges() {
        let Some(want) = desired.distance(j, i) else { return false };
        if ((positions[j - 1] - positions[i - 1]).norm() - want).abs() > tol {
            return false;
        }
    }
    for k in graph.followers() {
        let Some((i, j)) = graph.follower_anchors(k) else { return false };
        let Some(alpha_star) = desired.angle(k) else { return false };
        let Ok(z_ki) = bearing(positions[k - 1], positions[i - 1]) else { return false };
        let Ok(z_kj) = bearing(positions[k - 1], positions[j - 1]) else { return false };
        let Ok(alpha) = edge_angle(z_ki, z_kj) else { return false };
        // Angles this close to the target never wrap around the 0/2pi cut
        // for sane tolerances, so the raw difference is the right metric.
        if (alpha - alpha_star).abs() > tol {
            return false;
        }
    }
    true
}

/// Worst relative deviation between the analytic chart basis (scaled by the
/// chart scale factor) and central finite differences of the chart map,
/// evaluated in the focal frame.
pub fn check_basis_by_finite_difference(
    r: f64,
    alpha: f64,
    c: f64,
    step: f64,
) -> Result<f64, OracleError> {
    let q = scale_factor(&BipolarPoint { r, alpha, c })?;
    // Work in the focal frame itself: z_ji = (-1, 0) makes the frame axes
    // coincide with the global ones (x_hat = -z_ji, y_hat = -J z_ji).
    let z_ji = Vec2::new(-1.0, 0.0);
    let basis = bipolar_basis(r, alpha, z_ji)?;
    let p = |r: f64, alpha: f64| bipolar_to_cartesian(&BipolarPoint { r, alpha, c });
    let fd_r = (p(r + step, alpha)? - p(r - step, alpha)?) / (2.0 * step);
    let fd_alpha = (p(r, alpha + step)? - p(r, alpha - step)?) / (2.0 * step);
    let dev_r = (fd_r / q - basis.r_hat).norm();
    let dev_alpha = (fd_alpha / q - basis.alpha_hat).norm();
    Ok(dev_r.max(dev_alpha))
}

/// Analytic vs numeric time derivatives of a follower's log ratio and angle
/// under given agent velocities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCheck {
    pub r_analytic: f64,
    pub r_numeric: f64,
    pub alpha_analytic: f64,
    pub alpha_numeric: f64,
}

impl RateCheck {
    pub fn max_deviation(&self) -> f64 {
        (self.r_analytic - self.r_numeric)
            .abs()
            .max((self.alpha_analytic - self.alpha_numeric).abs())
    }
}

/// Compares the closed-form measurement rates
/// `r_dot = z_ki . p_ki_dot / |p_ki| - z_kj . p_kj_dot / |p_kj|` and
/// `alpha_dot = (J z_kj) . p_kj_dot / |p_kj| - (J z_ki) . p_ki_dot / |p_ki|`
/// (the angle is the difference of the two bearing headings, j leg first)
/// against central differences of the measured quantities along the motion.
pub fn check_angle_rate(
    p_i: Vec2,
    p_j: Vec2,
    p_k: Vec2,
    v_i: Vec2,
    v_j: Vec2,
    v_k: Vec2,
    step: f64,
) -> Result<RateCheck, OracleError> {
    let z_ki = bearing(p_k, p_i)?;
    let z_kj = bearing(p_k, p_j)?;
    let d_ki = (p_i - p_k).norm();
    let d_kj = (p_j - p_k).norm();
    let rel_i = v_i - v_k;
    let rel_j = v_j - v_k;
    let r_analytic = z_ki.dot(rel_i) / d_ki - z_kj.dot(rel_j) / d_kj;
    let alpha_analytic = z_kj.rot90().dot(rel_j) / d_kj - z_ki.rot90().dot(rel_i) / d_ki;

    let measure = |s: f64| -> Result<(f64, f64), GeometryError> {
        let bp =
            triangle_bipolar(p_i + s * v_i, p_j + s * v_j, p_k + s * v_k)?;
        Ok((bp.r, bp.alpha))
    };
    let (r_plus, alpha_plus) = measure(step)?;
    let (r_minus, alpha_minus) = measure(-step)?;
    Ok(RateCheck {
        r_analytic,
        r_numeric: (r_plus - r_minus) / (2.0 * step),
        alpha_analytic,
        alpha_numeric: (alpha_plus - alpha_minus) / (2.0 * step),
    })
}

/// One sampled positivity/conditioning report for the follower loop matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopGainReport {
    pub samples: usize,
    pub min_gain: f64,
    pub max_gain: f64,
    /// Largest deviation of eta from `gain * r_hat` (they must be parallel).
    pub max_alignment_deviation: f64,
    /// Largest deviation of `x^T (G B) x - gain |x|^2` over random probes.
    pub max_quadratic_deviation: f64,
}

/// Samples random follower configurations and reports the loop gain
/// `m = eta . r_hat`, where `eta = z_kj / |p_kj| - z_ki / |p_ki|` is the
/// gradient of the log ratio with respect to the follower position. The
/// closed loop is uniformly contracting iff the gain stays positive; the
/// quadratic-form probe checks `x^T (G B) x = m |x|^2` for the full
/// measurement-times-basis matrix.
pub fn sample_loop_gain(
    rng: &mut impl Rng,
    samples: usize,
    angle_margin: f64,
    dist_range: (f64, f64),
) -> LoopGainReport {
    let mut report = LoopGainReport {
        samples,
        min_gain: f64::INFINITY,
        max_gain: f64::NEG_INFINITY,
        max_alignment_deviation: 0.0,
        max_quadratic_deviation: 0.0,
    };
    for _ in 0..samples {
        let d_ki = rng.random_range(dist_range.0..dist_range.1);
        let d_kj = rng.random_range(dist_range.0..dist_range.1);
        let alpha =
            rng.random_range(angle_margin..std::f64::consts::TAU - angle_margin);
        let spin = rng.random_range(0.0..std::f64::consts::TAU);
        // Realize the configuration: follower at the origin, anchor i along
        // `spin`, anchor j at alpha counterclockwise from it.
        let z_ki = Vec2::new(spin.cos(), spin.sin());
        let z_kj = z_ki.rotated(alpha);
        let p_k = Vec2::ZERO;
        let p_i = p_k + d_ki * z_ki;
        let p_j = p_k + d_kj * z_kj;

        let bp = triangle_bipolar(p_i, p_j, p_k).expect("non-degenerate by construction");
        let z_ji = bearing(p_j, p_i).expect("anchors distinct");
        let basis = bipolar_basis(bp.r, bp.alpha, z_ji).expect("chart regular");
        let eta = z_kj / d_kj - z_ki / d_ki;
        let m = eta.dot(basis.r_hat);
        report.min_gain = report.min_gain.min(m);
        report.max_gain = report.max_gain.max(m);
        report.max_alignment_deviation =
            report.max_alignment_deviation.max((eta - m * basis.r_hat).norm());

        // x^T (G B) x with G = [eta^T; (J^T eta)^T] ... assembled directly:
        // G maps a follower velocity to (r_dot, alpha_dot); B = [r_hat alpha_hat].
        let x = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let v = x.x * basis.r_hat + x.y * basis.alpha_hat;
        let r_dot = eta.dot(v);
        let alpha_dot = eta.rot90().dot(v) * -1.0; // (J^T eta) . v = -(J eta) . v
        let quad = x.x * r_dot + x.y * alpha_dot;
        report.max_quadratic_deviation =
            report.max_quadratic_deviation.max((quad - m * x.norm_squared()).abs());
    }
    report
}
