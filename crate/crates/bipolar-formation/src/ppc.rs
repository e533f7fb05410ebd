//! Prescribed performance machinery: exponentially shrinking error funnels,
//! the log-ratio barrier transform, and per-channel bound selection rules.
//!
//! A channel keeps its error inside the moving band
//! `-b_lower * rho(t) < e(t) < b_upper * rho(t)` with
//! `rho(t) = (1 - rho_inf) * exp(-l t) + rho_inf`. Controllers work with the
//! modulated error `e / rho`, its barrier image `sigma = T(e/rho)` and the
//! barrier slope factor `xi = (dT/de~) / rho`, which blows up as the error
//! approaches either edge of the band.

use thiserror::Error;

/// Sampling step of the time grid used by the bound selection rules.
pub const SELECTION_GRID_DT: f64 = 0.01;
/// Safety factor applied to grid infima so that inter-sample dips stay safe.
pub const SELECTION_MARGIN: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PpcError {
    /// The modulated error reached or crossed a funnel edge.
    #[error("modulated error {e_tilde} outside the open band (-{b_lower}, {b_upper})")]
    OutOfBounds { e_tilde: f64, b_lower: f64, b_upper: f64 },
    /// The initial error does not fit strictly inside the funnel at t = 0.
    #[error("initial error {e0} outside the open band (-{lower}, {upper}) at t = 0")]
    InfeasibleInitial { e0: f64, lower: f64, upper: f64 },
    /// The reference trajectory itself makes the funnel empty.
    #[error("infeasible reference: {0}")]
    InfeasibleReference(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

/// The decaying envelope `rho(t) = (1 - rho_inf) e^{-l t} + rho_inf`.
///
/// `rho(0) = 1` exactly; the envelope decays monotonically to `rho_inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerformanceFunction {
    pub decay_rate: f64,
    pub rho_inf: f64,
}

impl PerformanceFunction {
    pub fn new(decay_rate: f64, rho_inf: f64) -> Result<Self, PpcError> {
        if !(decay_rate > 0.0) || !decay_rate.is_finite() {
            return Err(PpcError::BadParameter(format!("decay rate {decay_rate} must be > 0")));
        }
        if !(rho_inf > 0.0 && rho_inf <= 1.0) {
            return Err(PpcError::BadParameter(format!("rho_inf {rho_inf} must be in (0, 1]")));
        }
        Ok(PerformanceFunction { decay_rate, rho_inf })
    }

    pub fn rho(&self, t: f64) -> f64 {
        (1.0 - self.rho_inf) * (-self.decay_rate * t).exp() + self.rho_inf
    }

    pub fn rho_dot(&self, t: f64) -> f64 {
        -self.decay_rate * (1.0 - self.rho_inf) * (-self.decay_rate * t).exp()
    }

    /// Time at which the envelope first reaches `level` (for
    /// `rho_inf < level <= 1`). In particular the envelope is within a factor
    /// of two of its floor from `time_to_reach(2 * rho_inf)` on.
    pub fn time_to_reach(&self, level: f64) -> f64 {
        ((1.0 - self.rho_inf) / (level - self.rho_inf)).ln() / self.decay_rate
    }
}

/// Modulated (funnel-normalized) error.
pub fn modulated_error(e: f64, rho_t: f64) -> f64 {
    e / rho_t
}

/// Barrier gains of one channel at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelGains {
    pub rho: f64,
    pub e_tilde: f64,
    pub sigma: f64,
    pub xi: f64,
}

/// One funnel-constrained error channel with asymmetric band edges.
#[derive(Debug, Clone, PartialEq)]
pub struct PpcChannel {
    pub perf: PerformanceFunction,
    pub b_lower: f64,
    pub b_upper: f64,
    /// Human-readable record of how the band edges were chosen.
    pub policy: String,
}

impl PpcChannel {
    pub fn new(perf: PerformanceFunction, b_lower: f64, b_upper: f64) -> Result<Self, PpcError> {
        if !(b_lower > 0.0) || !(b_upper > 0.0) || !b_lower.is_finite() || !b_upper.is_finite() {
            return Err(PpcError::BadParameter(format!(
                "band edges ({b_lower}, {b_upper}) must be positive and finite"
            )));
        }
        Ok(PpcChannel { perf, b_lower, b_upper, policy: "explicit".into() })
    }

    fn with_policy(mut self, policy: String) -> Self {
        self.policy = policy;
        self
    }

    pub fn rho(&self, t: f64) -> f64 {
        self.perf.rho(t)
    }

    /// Signed band edges `(-b_lower * rho(t), b_upper * rho(t))`.
    pub fn band_at(&self, t: f64) -> (f64, f64) {
        let rho = self.perf.rho(t);
        (-self.b_lower * rho, self.b_upper * rho)
    }

    /// Whether a modulated error lies strictly inside the band.
    pub fn contains(&self, e_tilde: f64) -> bool {
        e_tilde > -self.b_lower && e_tilde < self.b_upper
    }

    /// Barrier transform `T(e~) = ln(bU (e~ + bL) / (bL (bU - e~)))`.
    ///
    /// `T(0) = 0`, and `T` diverges to -inf / +inf at the band edges.
    pub fn transform(&self, e_tilde: f64) -> Result<f64, PpcError> {
        if !self.contains(e_tilde) {
            return Err(PpcError::OutOfBounds {
                e_tilde,
                b_lower: self.b_lower,
                b_upper: self.b_upper,
            });
        }
        Ok(((self.b_upper * (e_tilde + self.b_lower)) / (self.b_lower * (self.b_upper - e_tilde)))
            .ln())
    }

    /// Inverse of [`transform`](Self::transform); maps all of R into the band.
    pub fn inverse_transform(&self, sigma: f64) -> f64 {
        let es = sigma.exp();
        self.b_lower * self.b_upper * (es - 1.0) / (self.b_upper + self.b_lower * es)
    }

    /// Barrier slope factor `xi = (1/rho) (1/(e~ + bL) + 1/(bU - e~)) > 0`,
    /// i.e. `(dT/de~) / rho` evaluated at the modulated error.
    pub fn xi(&self, e_tilde: f64, rho_t: f64) -> Result<f64, PpcError> {
        if !self.contains(e_tilde) {
            return Err(PpcError::OutOfBounds {
                e_tilde,
                b_lower: self.b_lower,
                b_upper: self.b_upper,
            });
        }
        Ok((1.0 / (e_tilde + self.b_lower) + 1.0 / (self.b_upper - e_tilde)) / rho_t)
    }

    /// Modulated error, barrier value and slope factor at time `t`.
    pub fn gains(&self, e: f64, t: f64) -> Result<ChannelGains, PpcError> {
        let rho = self.perf.rho(t);
        let e_tilde = modulated_error(e, rho);
        Ok(ChannelGains {
            rho,
            e_tilde,
            sigma: self.transform(e_tilde)?,
            xi: self.xi(e_tilde, rho)?,
        })
    }
}

fn check_initial(channel: PpcChannel, e0: f64) -> Result<PpcChannel, PpcError> {
    // rho(0) = 1, so the band at t = 0 is (-b_lower, b_upper) itself.
    if !channel.contains(e0) {
        return Err(PpcError::InfeasibleInitial {
            e0,
            lower: channel.b_lower,
            upper: channel.b_upper,
        });
    }
    Ok(channel)
}

fn grid_min(horizon: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let steps = (horizon / SELECTION_GRID_DT).ceil().max(1.0) as usize;
    let mut min = f64::INFINITY;
    for k in 0..=steps {
        let t = (k as f64 * horizon / steps as f64).min(horizon);
        min = min.min(f(t));
    }
    min
}

/// Band edges for the squared-distance channel `e_d = |p|^2 - d*(t)^2`.
///
/// The lower edge takes the largest value that keeps the funnel floor above
/// the hard constraint `|p|^2 > 0`: `b_lower = 0.99 inf_t d*(t)^2 / rho(t)`
/// on a 0.01-spaced grid over the horizon. The upper edge is free; the
/// default `2 e_d(0) + 1` (or 1 when `e_d(0) <= 0`) contains the start with
/// slack while keeping the barrier slope moderate.
pub fn select_bounds_distance(
    d_star: impl Fn(f64) -> f64,
    perf: PerformanceFunction,
    horizon: f64,
    e0: f64,
) -> Result<PpcChannel, PpcError> {
    let min_d = grid_min(horizon, &d_star);
    if !(min_d > 0.0) {
        return Err(PpcError::InfeasibleReference(format!(
            "desired distance reaches {min_d} (must stay positive)"
        )));
    }
    let b_lower =
        SELECTION_MARGIN * grid_min(horizon, |t| d_star(t) * d_star(t) / perf.rho(t));
    let (b_upper, upper_rule) =
        if e0 > 0.0 { (2.0 * e0 + 1.0, "2*e0 + 1") } else { (1.0, "floor 1") };
    let channel = PpcChannel::new(perf, b_lower, b_upper)?.with_policy(format!(
        "lower 0.99*inf((d*)^2/rho), upper {upper_rule}"
    ));
    check_initial(channel, e0)
}

/// Band edges for a log-ratio channel: symmetric `max(1, 2 |e_r(0)|)`.
///
/// Log ratios are unconstrained, so any positive edges work; these contain
/// the initial error with a factor-of-two margin. Never fails.
pub fn select_bounds_ratio(perf: PerformanceFunction, e0: f64) -> PpcChannel {
    let b = (2.0 * e0.abs()).max(1.0);
    PpcChannel { perf, b_lower: b, b_upper: b, policy: "symmetric max(1, 2|e0|)".into() }
}

/// Band edges for an interior-angle channel with target `alpha_star`.
///
/// The defaults `b_lower = alpha_star`, `b_upper = 2*pi - alpha_star` make
/// the funnel at t = 0 exactly the chart domain (0, 2*pi), so initial
/// containment is equivalent to the measured angle being well defined.
pub fn select_bounds_angle(
    alpha_star: f64,
    perf: PerformanceFunction,
    e0: f64,
) -> Result<PpcChannel, PpcError> {
    if !(alpha_star > 0.0 && alpha_star < std::f64::consts::TAU) {
        return Err(PpcError::BadParameter(format!(
            "desired angle {alpha_star} outside (0, 2*pi)"
        )));
    }
    let channel = PpcChannel::new(perf, alpha_star, std::f64::consts::TAU - alpha_star)?
        .with_policy("lower alpha*, upper 2*pi - alpha*".into());
    check_initial(channel, e0)
}

/// Band edges for the bearing channel `e_beta = beta - beta*(t)`.
///
/// Keeps the funnel inside the principal branch: the measured bearing lives
/// in (-pi, pi], so `b_lower = 0.99 inf_t (pi + beta*(t))/rho(t)` and
/// `b_upper = 0.99 inf_t (pi - beta*(t))/rho(t)` on the selection grid.
pub fn select_bounds_bearing(
    beta_star: impl Fn(f64) -> f64,
    perf: PerformanceFunction,
    horizon: f64,
    e0: f64,
) -> Result<PpcChannel, PpcError> {
    let b_lower =
        SELECTION_MARGIN * grid_min(horizon, |t| (std::f64::consts::PI + beta_star(t)) / perf.rho(t));
    let b_upper =
        SELECTION_MARGIN * grid_min(horizon, |t| (std::f64::consts::PI - beta_star(t)) / perf.rho(t));
    if !(b_lower > 0.0) || !(b_upper > 0.0) {
        return Err(PpcError::InfeasibleReference(
            "reference bearing reaches the +/-pi branch cut".into(),
        ));
    }
    let channel = PpcChannel::new(perf, b_lower, b_upper)?
        .with_policy("0.99*inf((pi -+ beta*)/rho) on each side".into());
    check_initial(channel, e0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn perf() -> PerformanceFunction {
        PerformanceFunction::new(0.5, 0.04).unwrap()
    }

    #[test]
    fn envelope_values() {
        let p = perf();
        assert_eq!(p.rho(0.0), 1.0);
        let expected = 0.96 * (-1.0f64).exp() + 0.04;
        assert!((p.rho(2.0) - expected).abs() < 1e-15);
        assert!((p.rho_dot(0.0) + 0.48).abs() < 1e-15);
        assert!(p.rho(1e6) >= 0.04);
    }

    #[test]
    fn envelope_derivative_matches_finite_difference() {
        let p = perf();
        let h = 1e-6;
        for &t in &[0.0, 0.3, 1.7, 6.0] {
            let fd = (p.rho(t + h) - p.rho(t - h)) / (2.0 * h);
            assert!((fd - p.rho_dot(t)).abs() < 1e-8);
        }
    }

    #[test]
    fn floor_approach_time() {
        let p = perf();
        let t = p.time_to_reach(2.0 * p.rho_inf);
        assert!((t - (0.96f64 / 0.04).ln() / 0.5).abs() < 1e-12);
        assert!((p.rho(t) - 0.08).abs() < 1e-12);
    }

    #[test]
    fn envelope_rejects_bad_parameters() {
        assert!(PerformanceFunction::new(0.0, 0.04).is_err());
        assert!(PerformanceFunction::new(0.5, 0.0).is_err());
        assert!(PerformanceFunction::new(0.5, 1.5).is_err());
    }

    #[test]
    fn symmetric_transform_values() {
        let ch = PpcChannel::new(perf(), 1.0, 1.0).unwrap();
        assert_eq!(ch.transform(0.0).unwrap(), 0.0);
        assert!((ch.transform(0.5).unwrap() - 3.0f64.ln()).abs() < 1e-15);
        assert!((ch.transform(-0.5).unwrap() + 3.0f64.ln()).abs() < 1e-15);
        assert!(matches!(ch.transform(1.0), Err(PpcError::OutOfBounds { .. })));
        assert!(matches!(ch.transform(-1.0), Err(PpcError::OutOfBounds { .. })));
    }

    #[test]
    fn asymmetric_transform_is_zero_at_zero() {
        let ch = PpcChannel::new(perf(), 0.3, 7.0).unwrap();
        assert_eq!(ch.transform(0.0).unwrap(), 0.0);
    }

    #[test]
    fn inverse_transform_round_trip() {
        let ch = PpcChannel::new(perf(), 0.8, 2.5).unwrap();
        for &e in &[-0.79, -0.4, 0.0, 1.3, 2.49] {
            let sigma = ch.transform(e).unwrap();
            assert!((ch.inverse_transform(sigma) - e).abs() < 1e-12);
        }
        // Saturates at the band edges for huge barrier values.
        assert!((ch.inverse_transform(60.0) - 2.5).abs() < 1e-9);
        assert!((ch.inverse_transform(-60.0) + 0.8).abs() < 1e-9);
    }

    #[test]
    fn slope_factor_reference_value() {
        let ch = PpcChannel::new(perf(), 1.0, 1.0).unwrap();
        assert!((ch.xi(0.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        // Halved envelope doubles the slope factor.
        assert!((ch.xi(0.0, 0.5).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn distance_bounds_match_reference_rule() {
        let ch = select_bounds_distance(|_| 1.875, perf(), 40.0, 1.0).unwrap();
        assert!((ch.b_lower - 0.99 * 1.875 * 1.875).abs() < 1e-12);
        assert!((ch.b_upper - 3.0).abs() < 1e-12);
        // Non-positive initial error falls back to the unit upper edge.
        let ch = select_bounds_distance(|_| 1.875, perf(), 40.0, -0.5).unwrap();
        assert_eq!(ch.b_upper, 1.0);
    }

    #[test]
    fn near_collision_start_is_infeasible() {
        // Distance almost zero: e0 just above -d*^2 but below the funnel floor.
        let e0 = -1.875f64 * 1.875 * 0.999;
        assert!(matches!(
            select_bounds_distance(|_| 1.875, perf(), 40.0, e0),
            Err(PpcError::InfeasibleInitial { .. })
        ));
    }

    #[test]
    fn ratio_bounds_always_contain_start() {
        let ch = select_bounds_ratio(perf(), 0.0);
        assert_eq!((ch.b_lower, ch.b_upper), (1.0, 1.0));
        let ch = select_bounds_ratio(perf(), -0.8);
        assert_eq!((ch.b_lower, ch.b_upper), (1.6, 1.6));
        assert!(ch.contains(-0.8));
    }

    #[test]
    fn angle_bounds_span_the_chart_domain() {
        let a = PI / 3.0;
        let ch = select_bounds_angle(a, perf(), 0.1).unwrap();
        assert!((ch.b_lower - a).abs() < 1e-15);
        assert!((ch.b_upper - (2.0 * PI - a)).abs() < 1e-15);
        // Initial angle of 0 (error exactly -alpha*) is out.
        assert!(matches!(
            select_bounds_angle(a, perf(), -a),
            Err(PpcError::InfeasibleInitial { .. })
        ));
    }

    #[test]
    fn bearing_bounds_for_constant_references() {
        let ch = select_bounds_bearing(|_| 0.0, perf(), 40.0, 0.3).unwrap();
        assert!((ch.b_lower - 0.99 * PI).abs() < 1e-12);
        assert!((ch.b_upper - 0.99 * PI).abs() < 1e-12);
        let ch = select_bounds_bearing(|_| PI / 2.0, perf(), 40.0, 0.0).unwrap();
        assert!((ch.b_lower - 0.99 * 1.5 * PI).abs() < 1e-12);
        assert!((ch.b_upper - 0.99 * 0.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn selected_bands_respect_their_constraints_on_a_dense_grid() {
        let p = perf();
        let d_star = |t: f64| 1.875 - 0.5 * (0.3 * t).sin();
        let ch = select_bounds_distance(d_star, p, 40.0, 2.0).unwrap();
        let beta_star = |t: f64| 0.8 * (0.2 * t).sin();
        let cb = select_bounds_bearing(beta_star, p, 40.0, 0.1).unwrap();
        let mut t = 0.0;
        while t <= 40.0 {
            // Funnel floor below the hard constraint boundary.
            assert!(d_star(t) * d_star(t) - ch.b_lower * p.rho(t) >= 0.0);
            assert!(PI + beta_star(t) - cb.b_lower * p.rho(t) >= 0.0);
            assert!(PI - beta_star(t) - cb.b_upper * p.rho(t) >= 0.0);
            t += 0.003;
        }
    }
}
