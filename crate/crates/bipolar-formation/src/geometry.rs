//! Bearing-only relative geometry and the bipolar coordinate chart.
//!
//! Everything here is purely kinematic: bearings between agents, the
//! counterclockwise edge angle measured between two bearings, the log distance
//! ratio, and the bipolar coordinate chart (r, alpha) attached to an ordered
//! pair of focal agents, together with its orthonormal coordinate basis.

use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

/// Positions closer than this are treated as collocated.
pub const EPS_POS: f64 = 1e-9;
/// Denominators smaller than this are treated as singular.
pub const EPS_DEN: f64 = 1e-12;
/// Unit vectors may deviate from norm 1 by at most this much.
pub const EPS_UNIT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// Two points that must be distinct are within `EPS_POS` of each other.
    #[error("collocated points (separation {separation:.3e})")]
    Collocated { separation: f64 },
    /// A direction that must be unit-norm is not.
    #[error("expected unit vector, got norm {norm}")]
    NotUnit { norm: f64 },
    /// The bipolar chart denominator cosh(r) - cos(alpha) vanished.
    #[error("bipolar chart singular (cosh r - cos alpha = {denominator:.3e})")]
    FocalSingularity { denominator: f64 },
    /// A triangle collapsed: the two foci are indistinguishable from here.
    #[error("degenerate triangle (residual norm {residual:.3e})")]
    DegenerateTriangle { residual: f64 },
}

/// Unit vector pointing from `from` toward `to`.
pub fn bearing(from: Vec2, to: Vec2) -> Result<Vec2, GeometryError> {
    let d = to - from;
    let n = d.norm();
    if n <= EPS_POS {
        return Err(GeometryError::Collocated { separation: n });
    }
    Ok(d / n)
}

fn require_unit(z: Vec2) -> Result<(), GeometryError> {
    let n = z.norm();
    if (n - 1.0).abs() > EPS_UNIT {
        return Err(GeometryError::NotUnit { norm: n });
    }
    Ok(())
}

/// Counterclockwise angle in [0, 2*pi) that rotates bearing `z_ki` onto `z_kj`.
///
/// The sign test uses the half-plane of `J z_ki`: when `z_kj` lies on or above
/// it the principal arccos value applies, otherwise the reflex angle. Both
/// branches agree (= pi) for opposite bearings.
pub fn edge_angle(z_ki: Vec2, z_kj: Vec2) -> Result<f64, GeometryError> {
    require_unit(z_ki)?;
    require_unit(z_kj)?;
    let principal = z_ki.dot(z_kj).clamp(-1.0, 1.0).acos();
    if z_ki.rot90().dot(z_kj) >= 0.0 {
        Ok(principal)
    } else {
        Ok(TAU - principal)
    }
}

/// Log distance ratio `ln(dist_ki / dist_kj)`.
pub fn log_ratio(dist_ki: f64, dist_kj: f64) -> Result<f64, GeometryError> {
    let d = dist_ki.min(dist_kj);
    if d <= EPS_POS {
        return Err(GeometryError::Collocated { separation: d });
    }
    Ok((dist_ki / dist_kj).ln())
}

/// A point of the bipolar chart attached to an ordered focal pair (i, j).
///
/// `r` is the log ratio of distances to the foci (positive toward focus j),
/// `alpha` the counterclockwise angle subtended by the foci in [0, 2*pi), and
/// `c` the half distance between the foci.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BipolarPoint {
    pub r: f64,
    pub alpha: f64,
    pub c: f64,
}

impl BipolarPoint {
    /// Builds a chart point, normalizing `alpha` into [0, 2*pi).
    pub fn new(r: f64, alpha: f64, c: f64) -> Self {
        BipolarPoint { r, alpha: alpha.rem_euclid(TAU), c }
    }
}

/// Cartesian coordinates of a chart point in the focal frame.
///
/// The frame has its origin at the midpoint of the foci, focus i at (-c, 0)
/// and focus j at (+c, 0); see [`EdgeFrame`] for the embedding in the plane.
pub fn bipolar_to_cartesian(p: &BipolarPoint) -> Result<Vec2, GeometryError> {
    if p.c <= EPS_POS {
        return Err(GeometryError::Collocated { separation: 2.0 * p.c });
    }
    let den = p.r.cosh() - p.alpha.cos();
    if den <= EPS_DEN {
        return Err(GeometryError::FocalSingularity { denominator: den });
    }
    Ok(Vec2::new(p.c * p.r.sinh() / den, p.c * p.alpha.sin() / den))
}

/// Local scale factor of the bipolar chart, `c / (cosh r - cos alpha)`.
///
/// Both coordinate directions share it: a small change `dr` (or `dalpha`)
/// moves the point by `q * dr` (resp. `q * dalpha`) in the plane.
pub fn scale_factor(p: &BipolarPoint) -> Result<f64, GeometryError> {
    if p.c <= EPS_POS {
        return Err(GeometryError::Collocated { separation: 2.0 * p.c });
    }
    let den = p.r.cosh() - p.alpha.cos();
    if den <= EPS_DEN {
        return Err(GeometryError::FocalSingularity { denominator: den });
    }
    Ok(p.c / den)
}

/// Orthonormal coordinate directions of the bipolar chart at a point,
/// expressed in the global frame.
///
/// `alpha_hat` points along increasing `alpha`, `r_hat` along increasing `r`,
/// and `r_hat = J alpha_hat`. The pair is computed from the inter-focal
/// bearing `z_ji` (from focus j toward focus i) without knowing the focal
/// positions themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BipolarBasis {
    pub r_hat: Vec2,
    pub alpha_hat: Vec2,
    /// Component of `alpha_hat` along `-z_ji` (the frame x axis).
    pub f1: f64,
    /// Component of `alpha_hat` along `J^T z_ji` (the frame y axis).
    pub f2: f64,
}

/// Evaluates the chart basis at `(r, alpha)` given the inter-focal bearing.
pub fn bipolar_basis(r: f64, alpha: f64, z_ji: Vec2) -> Result<BipolarBasis, GeometryError> {
    require_unit(z_ji)?;
    let den = r.cosh() - alpha.cos();
    if den <= EPS_DEN {
        return Err(GeometryError::FocalSingularity { denominator: den });
    }
    let f1 = -r.sinh() * alpha.sin() / den;
    let f2 = (alpha.cos() * r.cosh() - 1.0) / den;
    // x axis of the focal frame is -z_ji, y axis is J^T z_ji = -J z_ji.
    let x_hat = -z_ji;
    let y_hat = -z_ji.rot90();
    let alpha_hat = f1 * x_hat + f2 * y_hat;
    let r_hat = -f2 * x_hat + f1 * y_hat;
    Ok(BipolarBasis { r_hat, alpha_hat, f1, f2 })
}

/// Recovers the inter-focal bearing `z_ji` from one observer's measurements.
///
/// `ratio * z_ki - z_kj` is parallel to the segment from j to i and keeps its
/// orientation, so normalizing it reproduces the bearing the observer cannot
/// sense directly. `ratio` is `dist_ki / dist_kj`.
pub fn reconstruct_neighbor_bearing(
    z_ki: Vec2,
    z_kj: Vec2,
    ratio: f64,
) -> Result<Vec2, GeometryError> {
    require_unit(z_ki)?;
    require_unit(z_kj)?;
    let z = ratio * z_ki - z_kj;
    let n = z.norm();
    if n <= EPS_DEN {
        return Err(GeometryError::DegenerateTriangle { residual: n });
    }
    Ok(z / n)
}

/// The focal frame of an ordered pair of points: origin at their midpoint,
/// x axis toward focus j, i.e. along `-z_ji`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeFrame {
    pub origin: Vec2,
    pub x_hat: Vec2,
    pub y_hat: Vec2,
    /// Half distance between the foci.
    pub c: f64,
}

impl EdgeFrame {
    /// Frame of the pair (focus i, focus j). In it, i sits at (-c, 0) and j
    /// at (+c, 0).
    pub fn from_foci(p_i: Vec2, p_j: Vec2) -> Result<Self, GeometryError> {
        let z_ji = bearing(p_j, p_i)?;
        Ok(EdgeFrame {
            origin: 0.5 * (p_i + p_j),
            x_hat: -z_ji,
            y_hat: -z_ji.rot90(),
            c: 0.5 * (p_i - p_j).norm(),
        })
    }

    pub fn to_global(&self, local: Vec2) -> Vec2 {
        self.origin + local.x * self.x_hat + local.y * self.y_hat
    }

    pub fn to_local(&self, global: Vec2) -> Vec2 {
        let d = global - self.origin;
        Vec2::new(d.dot(self.x_hat), d.dot(self.y_hat))
    }
}

/// Bipolar coordinates of point `p_k` in the chart of the focal pair (i, j),
/// measured from plain positions.
pub fn triangle_bipolar(p_i: Vec2, p_j: Vec2, p_k: Vec2) -> Result<BipolarPoint, GeometryError> {
    let z_ki = bearing(p_k, p_i)?;
    let z_kj = bearing(p_k, p_j)?;
    let r = log_ratio((p_i - p_k).norm(), (p_j - p_k).norm())?;
    let alpha = edge_angle(z_ki, z_kj)?;
    let c = 0.5 * (p_i - p_j).norm();
    if c <= EPS_POS {
        return Err(GeometryError::Collocated { separation: 2.0 * c });
    }
    Ok(BipolarPoint { r, alpha, c })
}
