//! Time-varying reference signals and disturbances with analytic derivatives.
//!
//! Everything a scenario can vary over time — leader velocity, desired
//! inter-leader distance, desired bearing, disturbances — is one of these
//! schedules, so runs are exactly reproducible and derivative information is
//! available without numerical differentiation.

use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// One sinusoidal term `amplitude * wave(omega t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinTerm {
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
    #[serde(default)]
    pub wave: Wave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wave {
    #[default]
    Sin,
    Cos,
}

impl SinTerm {
    fn eval(&self, t: f64) -> f64 {
        let arg = self.omega * t + self.phase;
        match self.wave {
            Wave::Sin => self.amplitude * arg.sin(),
            Wave::Cos => self.amplitude * arg.cos(),
        }
    }

    fn deriv(&self, t: f64) -> f64 {
        let arg = self.omega * t + self.phase;
        match self.wave {
            Wave::Sin => self.amplitude * self.omega * arg.cos(),
            Wave::Cos => -self.amplitude * self.omega * arg.sin(),
        }
    }
}

/// A plateau anchor of a piecewise-smooth schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub t: f64,
    pub value: f64,
}

/// Quintic smoothstep: C^2, with zero first and second derivative at 0 and 1.
fn smootherstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (u * (6.0 * u - 15.0) + 10.0)
}

fn smootherstep_slope(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    30.0 * u * u * (u - 1.0) * (u - 1.0)
}

/// A scalar signal of time with an analytic derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScalarSchedule {
    Constant { value: f64 },
    /// `offset + sum of terms`.
    Sinusoids {
        #[serde(default)]
        offset: f64,
        terms: Vec<SinTerm>,
    },
    /// Holds each knot value, blending C^2-smoothly between consecutive
    /// knots; constant before the first and after the last. Knot times must
    /// be strictly increasing.
    PiecewiseSmooth { knots: Vec<Knot> },
    /// Tracks the polar heading of a planar velocity signal plus an offset,
    /// ramped in smoothly over [ramp_start, ramp_end] (zero before). The
    /// velocity must keep a nonzero norm and a heading away from the +/-pi
    /// cut while the ramp is active.
    HeadingTracking {
        velocity: Box<Vec2Schedule>,
        #[serde(default)]
        offset: f64,
        ramp_start: f64,
        ramp_end: f64,
    },
}

impl ScalarSchedule {
    pub const fn constant(value: f64) -> Self {
        ScalarSchedule::Constant { value }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_deriv(t).0
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.eval_with_deriv(t).1
    }

    pub fn eval_with_deriv(&self, t: f64) -> (f64, f64) {
        match self {
            ScalarSchedule::Constant { value } => (*value, 0.0),
            ScalarSchedule::Sinusoids { offset, terms } => (
                offset + terms.iter().map(|s| s.eval(t)).sum::<f64>(),
                terms.iter().map(|s| s.deriv(t)).sum::<f64>(),
            ),
            ScalarSchedule::PiecewiseSmooth { knots } => {
                if knots.is_empty() {
                    return (0.0, 0.0);
                }
                if t <= knots[0].t {
                    return (knots[0].value, 0.0);
                }
                if t >= knots[knots.len() - 1].t {
                    return (knots[knots.len() - 1].value, 0.0);
                }
                let m = knots.partition_point(|k| k.t <= t) - 1;
                let (a, b) = (knots[m], knots[m + 1]);
                let span = b.t - a.t;
                let u = (t - a.t) / span;
                (
                    a.value + (b.value - a.value) * smootherstep(u),
                    (b.value - a.value) * smootherstep_slope(u) / span,
                )
            }
            ScalarSchedule::HeadingTracking { velocity, offset, ramp_start, ramp_end } => {
                let v = velocity.eval(t);
                let a = velocity.deriv(t);
                let n2 = v.norm_squared();
                let (heading, heading_dot) = if n2 > 1e-12 {
                    (v.angle(), (v.x * a.y - v.y * a.x) / n2)
                } else {
                    (0.0, 0.0)
                };
                let target = heading + offset;
                let (ramp, ramp_dot) = if *ramp_end <= *ramp_start {
                    (if t >= *ramp_start { 1.0 } else { 0.0 }, 0.0)
                } else {
                    let u = (t - ramp_start) / (ramp_end - ramp_start);
                    (smootherstep(u), smootherstep_slope(u) / (ramp_end - ramp_start))
                };
                (ramp * target, ramp_dot * target + ramp * heading_dot)
            }
        }
    }

    /// Structural sanity: finite parameters, strictly increasing knot times.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            ScalarSchedule::Constant { value } => {
                if !value.is_finite() {
                    return Err(format!("constant value {value} not finite"));
                }
            }
            ScalarSchedule::Sinusoids { offset, terms } => {
                if !offset.is_finite() {
                    return Err("sinusoid offset not finite".into());
                }
                for s in terms {
                    if ![s.amplitude, s.omega, s.phase].iter().all(|x| x.is_finite()) {
                        return Err("sinusoid term has non-finite parameters".into());
                    }
                }
            }
            ScalarSchedule::PiecewiseSmooth { knots } => {
                if knots.is_empty() {
                    return Err("piecewise schedule needs at least one knot".into());
                }
                for w in knots.windows(2) {
                    if !(w[1].t > w[0].t) {
                        return Err(format!(
                            "knot times must strictly increase ({} then {})",
                            w[0].t, w[1].t
                        ));
                    }
                }
                if knots.iter().any(|k| !k.t.is_finite() || !k.value.is_finite()) {
                    return Err("piecewise knot has non-finite entries".into());
                }
            }
            ScalarSchedule::HeadingTracking { velocity, offset, ramp_start, ramp_end } => {
                velocity.validate()?;
                if ![*offset, *ramp_start, *ramp_end].iter().all(|x| x.is_finite()) {
                    return Err("heading tracking has non-finite parameters".into());
                }
                if ramp_end < ramp_start {
                    return Err("heading ramp must end at or after its start".into());
                }
            }
        }
        Ok(())
    }
}

/// A planar signal of time: independent scalar schedules per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vec2Schedule {
    pub x: ScalarSchedule,
    pub y: ScalarSchedule,
}

impl Vec2Schedule {
    pub const fn zero() -> Self {
        Vec2Schedule { x: ScalarSchedule::constant(0.0), y: ScalarSchedule::constant(0.0) }
    }

    pub const fn constant(x: f64, y: f64) -> Self {
        Vec2Schedule { x: ScalarSchedule::constant(x), y: ScalarSchedule::constant(y) }
    }

    pub fn eval(&self, t: f64) -> Vec2 {
        Vec2::new(self.x.eval(t), self.y.eval(t))
    }

    pub fn deriv(&self, t: f64) -> Vec2 {
        Vec2::new(self.x.deriv(t), self.y.deriv(t))
    }

    pub fn validate(&self) -> Result<(), String> {
        self.x.validate()?;
        self.y.validate()
    }
}
