//! The three agent roles and their velocity control laws.
//!
//! Each controller is a pure function of an agent-local sensing snapshot,
//! the agent's funnel channels, and time. All vector quantities in a
//! snapshot are expressed in the agent's own (arbitrarily rotated) frame;
//! the returned command is in that same frame. None of the laws use global
//! positions, which is what makes the commands equivariant under frame
//! rotations (checked by [`frame_invariance_check`]).

use crate::geometry::{
    bipolar_basis, edge_angle, reconstruct_neighbor_bearing, GeometryError,
};
use crate::ppc::{PpcChannel, PpcError};
use crate::vec2::Vec2;
use thiserror::Error;

/// Which funnel channel a control-side failure belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Distance,
    Bearing,
    Ratio,
    Angle,
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ChannelKind::Distance => "distance",
            ChannelKind::Bearing => "bearing",
            ChannelKind::Ratio => "ratio",
            ChannelKind::Angle => "angle",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("{kind} channel: {source}")]
    Funnel { kind: ChannelKind, source: PpcError },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("snapshot role does not match the agent parameters")]
    RoleMismatch,
}

/// What the trajectory-tracking agent measures: its bearing to the leader,
/// the distance, and the current reference values. `ref_rotation` is the
/// fixed angle that maps this agent's frame onto the designated orientation
/// reference frame (static knowledge, part of the agent's calibration).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondarySnapshot {
    pub z21: Vec2,
    pub dist21: f64,
    pub d_star: f64,
    /// Desired bearing in the orientation reference frame, when the
    /// orientation channel is active.
    pub beta_star: Option<f64>,
    pub ref_rotation: f64,
}

/// What a two-anchor follower measures: bearings to both anchors and the
/// ratio of the two distances (no absolute lengths).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FollowerSnapshot {
    pub z_ki: Vec2,
    pub z_kj: Vec2,
    /// dist_ki / dist_kj.
    pub ratio: f64,
}

/// A role-tagged sensing snapshot, all vectors agent-local.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensingSnapshot {
    /// The leader senses nothing; it carries its open-loop velocity
    /// reference rotated into its own frame.
    Leader { velocity_ref: Vec2 },
    Secondary(SecondarySnapshot),
    Follower(FollowerSnapshot),
}

/// Funnel channels and targets of one agent.
#[derive(Debug, Clone, PartialEq)]
pub enum AgentParams {
    Leader,
    Secondary { distance: PpcChannel, bearing: Option<PpcChannel> },
    Follower { ratio: PpcChannel, angle: PpcChannel, r_star: f64, alpha_star: f64 },
}

/// A velocity command in the issuing agent's local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlCommand {
    pub velocity: Vec2,
}

/// The leader applies its reference velocity verbatim.
pub fn control_leader(velocity_ref: Vec2) -> ControlCommand {
    ControlCommand { velocity: velocity_ref }
}

/// Squared-distance error and (if active) bearing error of the secondary
/// leader. The bearing is the polar angle of the leader bearing expressed in
/// the orientation reference frame, so it lives in (-pi, pi] without any
/// explicit wrapping.
pub fn secondary_errors(s: &SecondarySnapshot) -> (f64, Option<f64>) {
    let e_d = s.dist21 * s.dist21 - s.d_star * s.d_star;
    let e_beta = s.beta_star.map(|beta_star| {
        let beta = s.z21.rotated(s.ref_rotation).angle();
        beta - beta_star
    });
    (e_d, e_beta)
}

/// Secondary-leader law: `u = xi_d sigma_d p_21 [+ xi_b sigma_b J z_21]`.
///
/// The distance term acts along the leader bearing (positive squared-distance
/// error pulls toward the leader), the optional orientation term acts along
/// the perpendicular `J z_21`, steering the bearing angle without touching
/// the distance.
pub fn control_secondary(
    s: &SecondarySnapshot,
    distance: &PpcChannel,
    bearing: Option<&PpcChannel>,
    t: f64,
) -> Result<ControlCommand, ControlError> {
    let (e_d, e_beta) = secondary_errors(s);
    let gd = distance
        .gains(e_d, t)
        .map_err(|source| ControlError::Funnel { kind: ChannelKind::Distance, source })?;
    let mut u = gd.xi * gd.sigma * (s.dist21 * s.z21);
    if let (Some(e_b), Some(ch)) = (e_beta, bearing) {
        let gb = ch
            .gains(e_b, t)
            .map_err(|source| ControlError::Funnel { kind: ChannelKind::Bearing, source })?;
        u += gb.xi * gb.sigma * s.z21.rot90();
    }
    Ok(ControlCommand { velocity: u })
}

/// Log-ratio and angle errors of a follower.
pub fn follower_errors(
    s: &FollowerSnapshot,
    r_star: f64,
    alpha_star: f64,
) -> Result<(f64, f64), GeometryError> {
    if !(s.ratio > 0.0) || !s.ratio.is_finite() {
        return Err(GeometryError::Collocated { separation: s.ratio });
    }
    let e_r = s.ratio.ln() - r_star;
    let e_alpha = edge_angle(s.z_ki, s.z_kj)? - alpha_star;
    Ok((e_r, e_alpha))
}

/// Follower law: `u = -xi_r sigma_r r_hat - xi_a sigma_a alpha_hat`.
///
/// The chart basis is evaluated at the measured (r, alpha), with the
/// inter-anchor bearing reconstructed from the snapshot itself, so the whole
/// computation stays in the follower's frame.
pub fn control_follower(
    s: &FollowerSnapshot,
    ratio: &PpcChannel,
    angle: &PpcChannel,
    r_star: f64,
    alpha_star: f64,
    t: f64,
) -> Result<ControlCommand, ControlError> {
    let (e_r, e_alpha) = follower_errors(s, r_star, alpha_star)?;
    let r = e_r + r_star;
    let alpha = e_alpha + alpha_star;
    let z_ji = reconstruct_neighbor_bearing(s.z_ki, s.z_kj, s.ratio)?;
    let basis = bipolar_basis(r, alpha, z_ji)?;
    let gr = ratio
        .gains(e_r, t)
        .map_err(|source| ControlError::Funnel { kind: ChannelKind::Ratio, source })?;
    let ga = angle
        .gains(e_alpha, t)
        .map_err(|source| ControlError::Funnel { kind: ChannelKind::Angle, source })?;
    let u = -(gr.xi * gr.sigma) * basis.r_hat - (ga.xi * ga.sigma) * basis.alpha_hat;
    Ok(ControlCommand { velocity: u })
}

/// Dispatches on the role pair.
pub fn control(
    snapshot: &SensingSnapshot,
    params: &AgentParams,
    t: f64,
) -> Result<ControlCommand, ControlError> {
    match (snapshot, params) {
        (SensingSnapshot::Leader { velocity_ref }, AgentParams::Leader) => {
            Ok(control_leader(*velocity_ref))
        }
        (SensingSnapshot::Secondary(s), AgentParams::Secondary { distance, bearing }) => {
            control_secondary(s, distance, bearing.as_ref(), t)
        }
        (
            SensingSnapshot::Follower(s),
            AgentParams::Follower { ratio, angle, r_star, alpha_star },
        ) => control_follower(s, ratio, angle, *r_star, *alpha_star, t),
        _ => Err(ControlError::RoleMismatch),
    }
}

/// The same snapshot as measured by a frame rotated `theta` counterclockwise
/// relative to the original one: directions pick up a rotation by `-theta`,
/// scalars are unchanged, and the calibration angle onto the orientation
/// reference frame grows by `theta`.
pub fn snapshot_rotated(snapshot: &SensingSnapshot, theta: f64) -> SensingSnapshot {
    match snapshot {
        SensingSnapshot::Leader { velocity_ref } => {
            SensingSnapshot::Leader { velocity_ref: velocity_ref.rotated(-theta) }
        }
        SensingSnapshot::Secondary(s) => SensingSnapshot::Secondary(SecondarySnapshot {
            z21: s.z21.rotated(-theta),
            ref_rotation: s.ref_rotation + theta,
            ..*s
        }),
        SensingSnapshot::Follower(s) => SensingSnapshot::Follower(FollowerSnapshot {
            z_ki: s.z_ki.rotated(-theta),
            z_kj: s.z_kj.rotated(-theta),
            ratio: s.ratio,
        }),
    }
}

/// Checks command equivariance under a frame rotation: measuring in a frame
/// rotated by `theta` and rotating the command back must reproduce the
/// original command within `tol` (absolute, scaled by 1 + |u|).
pub fn frame_invariance_check(
    snapshot: &SensingSnapshot,
    params: &AgentParams,
    t: f64,
    theta: f64,
    tol: f64,
) -> Result<bool, ControlError> {
    let u = control(snapshot, params, t)?.velocity;
    let rotated = snapshot_rotated(snapshot, theta);
    let u_rot = control(&rotated, params, t)?.velocity;
    let diff = (u_rot.rotated(theta) - u).norm();
    Ok(diff <= tol * (1.0 + u.norm()))
}
