//! Run configuration: graph, shape, schedules, funnels, frames and numerics,
//! all JSON-serializable so that a run is exactly reproducible from a file.

use crate::geometry::bearing;
use crate::graph::{
    validate_desired, validate_graph, DesiredFormation, FormationGraph, ValidationReport,
};
use crate::oracles::reconstruct_target_positions;
use crate::ppc::{
    select_bounds_angle, select_bounds_bearing, select_bounds_distance, select_bounds_ratio,
    PerformanceFunction, PpcChannel,
};
use crate::schedule::{Knot, ScalarSchedule, SinTerm, Vec2Schedule, Wave};
use crate::vec2::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI, TAU};
use std::path::Path;

/// A desired edge length entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeLength {
    pub edge: (usize, usize),
    pub length: f64,
}

/// An explicit desired angle for one follower.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FollowerAngle {
    pub follower: usize,
    pub alpha: f64,
}

/// An explicit desired log ratio for one follower.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FollowerRatio {
    pub follower: usize,
    pub r: f64,
}

/// Desired-shape section of a scenario file. Angles and ratios may be left
/// out: they are then derived from the edge lengths, with followers listed
/// in `reflected` taking the mirror-image (reflex) angle.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DesiredSpec {
    pub distances: Vec<EdgeLength>,
    #[serde(default)]
    pub angles: Vec<FollowerAngle>,
    #[serde(default)]
    pub ratios: Vec<FollowerRatio>,
    #[serde(default)]
    pub reflected: Vec<usize>,
}

impl DesiredSpec {
    pub fn to_formation(&self, graph: &FormationGraph) -> Result<DesiredFormation, String> {
        let mut distances = BTreeMap::new();
        for e in &self.distances {
            if distances.insert(e.edge, e.length).is_some() {
                return Err(format!("duplicate desired length for edge {:?}", e.edge));
            }
        }
        let reflected: BTreeSet<usize> = self.reflected.iter().copied().collect();
        let mut formation = if self.angles.is_empty() {
            DesiredFormation::from_distances(graph, distances, &reflected)
                .map_err(|e| e.to_string())?
        } else {
            let mut angles = BTreeMap::new();
            for a in &self.angles {
                angles.insert(a.follower, a.alpha);
            }
            let mut ratios = BTreeMap::new();
            for k in graph.followers() {
                let (i, j) = graph
                    .follower_anchors(k)
                    .ok_or_else(|| format!("follower {k} lacks an anchor pair"))?;
                let d_ki = distances
                    .get(&(k, i))
                    .ok_or_else(|| format!("missing desired length for edge ({k}, {i})"))?;
                let d_kj = distances
                    .get(&(k, j))
                    .ok_or_else(|| format!("missing desired length for edge ({k}, {j})"))?;
                ratios.insert(k, (d_ki / d_kj).ln());
                if !angles.contains_key(&k) {
                    return Err(format!("follower {k} has no desired angle"));
                }
            }
            DesiredFormation::from_parts(distances, angles, ratios)
        };
        // Explicit ratio entries override the derived values (useful for
        // exercising the shape validator from a file).
        if !self.ratios.is_empty() {
            let mut ratios = formation.ratios().clone();
            for r in &self.ratios {
                ratios.insert(r.follower, r.r);
            }
            formation = DesiredFormation::from_parts(
                formation.distances().clone(),
                formation.angles().clone(),
                ratios,
            );
        }
        Ok(formation)
    }

    /// Plain per-edge spec with derived angles/ratios.
    pub fn from_lengths(edges: &[(usize, usize)], length: f64, reflected: &[usize]) -> Self {
        DesiredSpec {
            distances: edges.iter().map(|&edge| EdgeLength { edge, length }).collect(),
            angles: vec![],
            ratios: vec![],
            reflected: reflected.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Euler,
    #[default]
    Rk4,
}

/// Additive velocity disturbance acting on one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceSpec {
    pub agent: usize,
    pub x: ScalarSchedule,
    pub y: ScalarSchedule,
}

/// Envelope parameters of one funnel class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerfSpec {
    pub decay_rate: f64,
    pub rho_inf: f64,
}

impl PerfSpec {
    pub fn to_perf(&self) -> Result<PerformanceFunction, String> {
        PerformanceFunction::new(self.decay_rate, self.rho_inf).map_err(|e| e.to_string())
    }
}

/// Funnel envelopes per channel class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpcParams {
    pub distance: PerfSpec,
    pub bearing: PerfSpec,
    pub ratio: PerfSpec,
    pub angle: PerfSpec,
}

/// How each agent's local frame is rotated relative to the global frame.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FramePolicy {
    /// All frames aligned with the global one.
    #[default]
    Aligned,
    /// Constant rotations drawn uniformly from [0, 2*pi), seeded.
    Seeded,
    /// Explicit rotation angles, one per agent.
    Fixed { angles: Vec<f64> },
}

/// A complete, self-contained run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub agents: usize,
    pub edges: Vec<(usize, usize)>,
    pub desired: DesiredSpec,
    pub initial_positions: Vec<Vec2>,
    pub horizon: f64,
    pub dt: f64,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default = "Vec2Schedule::zero")]
    pub leader_velocity: Vec2Schedule,
    #[serde(default)]
    pub disturbances: Vec<DisturbanceSpec>,
    /// Time-varying desired leader separation; constant at the nominal edge
    /// length when omitted.
    #[serde(default)]
    pub d21_reference: Option<ScalarSchedule>,
    /// Desired leader bearing in the orientation reference frame; the
    /// orientation channel is active iff present.
    #[serde(default)]
    pub beta_reference: Option<ScalarSchedule>,
    pub ppc: PpcParams,
    #[serde(default)]
    pub frames: FramePolicy,
    /// Rotation of the designated orientation reference frame.
    #[serde(default)]
    pub orientation_frame: f64,
    #[serde(default)]
    pub seed: u64,
    /// Separate seed for the frame rotations (defaults to `seed`).
    #[serde(default)]
    pub frame_seed: Option<u64>,
    /// Instants at which the trajectory plot draws the formation polygon.
    #[serde(default)]
    pub snapshot_times: Option<Vec<f64>>,
}

/// Funnel channels of every controlled agent, selected from the initial
/// state by the per-channel rules.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub distance: PpcChannel,
    pub bearing: Option<PpcChannel>,
    pub followers: BTreeMap<usize, FollowerChannelSet>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FollowerChannelSet {
    pub ratio: PpcChannel,
    pub angle: PpcChannel,
    pub r_star: f64,
    pub alpha_star: f64,
}

/// Errors of every channel at t = 0, measured from the initial positions.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialErrors {
    pub e_d: f64,
    pub e_beta: Option<f64>,
    /// Follower id -> (log-ratio error, angle error).
    pub followers: BTreeMap<usize, (f64, f64)>,
}

impl Scenario {
    pub fn graph(&self) -> FormationGraph {
        FormationGraph::new(self.agents, self.edges.clone())
    }

    pub fn desired_formation(&self) -> Result<DesiredFormation, String> {
        self.desired.to_formation(&self.graph())
    }

    /// The desired leader-separation schedule, explicit or constant nominal.
    pub fn resolved_d21(&self, desired: &DesiredFormation) -> ScalarSchedule {
        self.d21_reference
            .clone()
            .unwrap_or_else(|| ScalarSchedule::constant(desired.distance(2, 1).unwrap_or(f64::NAN)))
    }

    /// The disturbance schedule of one agent (zero when unspecified).
    pub fn disturbance(&self, agent: usize) -> Vec2Schedule {
        self.disturbances
            .iter()
            .find(|d| d.agent == agent)
            .map(|d| Vec2Schedule { x: d.x.clone(), y: d.y.clone() })
            .unwrap_or_else(Vec2Schedule::zero)
    }

    /// Resolved per-agent frame rotations.
    pub fn frame_angles(&self) -> Vec<f64> {
        match &self.frames {
            FramePolicy::Aligned => vec![0.0; self.agents],
            FramePolicy::Fixed { angles } => angles.clone(),
            FramePolicy::Seeded => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.frame_seed.unwrap_or(self.seed));
                (0..self.agents).map(|_| rng.random_range(0.0..TAU)).collect()
            }
        }
    }

    /// Measures every channel error at t = 0 from the configured positions.
    pub fn initial_errors(&self, desired: &DesiredFormation) -> Result<InitialErrors, String> {
        let p = &self.initial_positions;
        if p.len() != self.agents || self.agents < 2 {
            return Err(format!(
                "scenario provides {} positions for {} agents",
                p.len(),
                self.agents
            ));
        }
        let z21 = bearing(p[1], p[0])
            .map_err(|e| format!("agents 2 and 1 initial geometry: {e}"))?;
        let dist21 = (p[0] - p[1]).norm();
        let d0 = self.resolved_d21(desired).eval(0.0);
        let e_d = dist21 * dist21 - d0 * d0;
        let e_beta = match &self.beta_reference {
            None => None,
            Some(bs) => {
                let beta = z21.rotated(-self.orientation_frame).angle();
                Some(beta - bs.eval(0.0))
            }
        };
        let graph = self.graph();
        let mut followers = BTreeMap::new();
        for k in graph.followers() {
            let (i, j) = graph
                .follower_anchors(k)
                .ok_or_else(|| format!("follower {k} lacks an anchor pair"))?;
            let z_ki = bearing(p[k - 1], p[i - 1])
                .map_err(|e| format!("agents {k} and {i} initial geometry: {e}"))?;
            let z_kj = bearing(p[k - 1], p[j - 1])
                .map_err(|e| format!("agents {k} and {j} initial geometry: {e}"))?;
            let alpha = crate::geometry::edge_angle(z_ki, z_kj).map_err(|e| e.to_string())?;
            let ratio = (p[i - 1] - p[k - 1]).norm() / (p[j - 1] - p[k - 1]).norm();
            let r_star = desired
                .ratio(k)
                .ok_or_else(|| format!("follower {k} has no desired log ratio"))?;
            let alpha_star = desired
                .angle(k)
                .ok_or_else(|| format!("follower {k} has no desired angle"))?;
            followers.insert(k, (ratio.ln() - r_star, alpha - alpha_star));
        }
        Ok(InitialErrors { e_d, e_beta, followers })
    }

    /// Selects every funnel channel from the initial state. Collects all
    /// failures rather than stopping at the first.
    pub fn build_channels(&self) -> Result<ChannelSet, Vec<String>> {
        let desired = self.desired_formation().map_err(|e| vec![e])?;
        let errs = self.initial_errors(&desired).map_err(|e| vec![e])?;
        let mut violations = Vec::new();
        let mut perf = |spec: PerfSpec, what: &str| match spec.to_perf() {
            Ok(p) => Some(p),
            Err(e) => {
                violations.push(format!("{what} envelope: {e}"));
                None
            }
        };
        let perf_d = perf(self.ppc.distance, "distance");
        let perf_b = perf(self.ppc.bearing, "bearing");
        let perf_r = perf(self.ppc.ratio, "ratio");
        let perf_a = perf(self.ppc.angle, "angle");

        let d21 = self.resolved_d21(&desired);
        let distance = perf_d.and_then(|pf| {
            select_bounds_distance(|t| d21.eval(t), pf, self.horizon, errs.e_d)
                .map_err(|e| violations.push(format!("distance channel (agent 2): {e}")))
                .ok()
        });
        let bearing_ch = match (&self.beta_reference, errs.e_beta, perf_b) {
            (Some(bs), Some(e0), Some(pf)) => {
                select_bounds_bearing(|t| bs.eval(t), pf, self.horizon, e0)
                    .map_err(|e| violations.push(format!("bearing channel (agent 2): {e}")))
                    .ok()
            }
            _ => None,
        };
        let mut followers = BTreeMap::new();
        if let (Some(pf_r), Some(pf_a)) = (perf_r, perf_a) {
            for (&k, &(e_r0, e_a0)) in &errs.followers {
                let r_star = desired.ratio(k).unwrap_or(0.0);
                let alpha_star = desired.angle(k).unwrap_or(PI);
                let ratio = select_bounds_ratio(pf_r, e_r0);
                match select_bounds_angle(alpha_star, pf_a, e_a0) {
                    Ok(angle) => {
                        followers
                            .insert(k, FollowerChannelSet { ratio, angle, r_star, alpha_star });
                    }
                    Err(e) => violations.push(format!("angle channel (agent {k}): {e}")),
                }
            }
        }
        match (violations.is_empty(), distance) {
            (true, Some(distance)) => Ok(ChannelSet { distance, bearing: bearing_ch, followers }),
            _ => Err(violations),
        }
    }

    /// Full structural + feasibility validation.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.agents < 2 {
            report.violations.push(format!("agent count {} below minimum 2", self.agents));
        }
        if self.initial_positions.len() != self.agents {
            report.violations.push(format!(
                "{} initial positions for {} agents",
                self.initial_positions.len(),
                self.agents
            ));
        }
        if self.initial_positions.iter().any(|p| !p.is_finite()) {
            report.violations.push("non-finite initial position".into());
        }
        let graph = self.graph();
        let graph_report = validate_graph(&graph);
        report.violations.extend(graph_report.violations.iter().map(|v| format!("graph: {v}")));
        let desired = match self.desired.to_formation(&graph) {
            Ok(d) => Some(d),
            Err(e) => {
                report.violations.push(format!("shape: {e}"));
                None
            }
        };
        if let Some(desired) = &desired {
            let shape_report = validate_desired(&graph, desired);
            report.violations.extend(shape_report.violations.iter().map(|v| format!("shape: {v}")));
            report.warnings.extend(shape_report.warnings.iter().map(|w| format!("shape: {w}")));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            report.violations.push(format!("time step {} must be positive", self.dt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            report.violations.push(format!("horizon {} must be positive", self.horizon));
        }
        if self.dt > self.horizon {
            report.violations.push("time step exceeds the horizon".into());
        }
        if let Err(e) = self.leader_velocity.validate() {
            report.violations.push(format!("leader velocity: {e}"));
        }
        if let Some(s) = &self.d21_reference {
            if let Err(e) = s.validate() {
                report.violations.push(format!("separation reference: {e}"));
            }
        }
        if let Some(s) = &self.beta_reference {
            if let Err(e) = s.validate() {
                report.violations.push(format!("bearing reference: {e}"));
            }
        }
        let mut seen = BTreeSet::new();
        for d in &self.disturbances {
            if d.agent == 0 || d.agent > self.agents {
                report
                    .violations
                    .push(format!("disturbance for agent {} outside 1..={}", d.agent, self.agents));
            }
            if !seen.insert(d.agent) {
                report.violations.push(format!("duplicate disturbance for agent {}", d.agent));
            }
            if let Err(e) = d.x.validate().and(d.y.validate()) {
                report.violations.push(format!("disturbance (agent {}): {e}", d.agent));
            }
        }
        if let FramePolicy::Fixed { angles } = &self.frames {
            if angles.len() != self.agents {
                report.violations.push(format!(
                    "{} fixed frame angles for {} agents",
                    angles.len(),
                    self.agents
                ));
            }
        }
        if !self.orientation_frame.is_finite() {
            report.violations.push("orientation frame rotation must be finite".into());
        }
        if let Some(times) = &self.snapshot_times {
            if times.iter().any(|t| !t.is_finite() || *t < 0.0 || *t > self.horizon) {
                report.warnings.push("snapshot time outside [0, horizon]".into());
            }
        }
        if !report.violations.is_empty() {
            return report;
        }
        // Structure is sound: check initial funnel containment.
        if let Err(violations) = self.build_channels() {
            report.violations.extend(violations);
        }
        if let (Some(desired), Some(d21)) = (&desired, &self.d21_reference) {
            let nominal = desired.distance(2, 1).unwrap_or(f64::NAN);
            if (d21.eval(0.0) - nominal).abs() > 1e-9 {
                report.warnings.push(format!(
                    "separation reference starts at {} but the nominal edge length is {nominal}",
                    d21.eval(0.0)
                ));
            }
        }
        report
    }

    /// Applies a `key=value` override (CLI `--set`).
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<(), String> {
        let parse_f64 =
            |v: &str| v.parse::<f64>().map_err(|e| format!("invalid number '{v}': {e}"));
        match key {
            "dt" => self.dt = parse_f64(value)?,
            "horizon" => self.horizon = parse_f64(value)?,
            "orientation_frame" => self.orientation_frame = parse_f64(value)?,
            "seed" => {
                self.seed = value.parse().map_err(|e| format!("invalid seed '{value}': {e}"))?
            }
            "frame_seed" => {
                self.frame_seed =
                    Some(value.parse().map_err(|e| format!("invalid seed '{value}': {e}"))?)
            }
            "integrator" => {
                self.integrator = match value {
                    "euler" => Integrator::Euler,
                    "rk4" => Integrator::Rk4,
                    other => return Err(format!("unknown integrator '{other}'")),
                }
            }
            "name" => self.name = value.to_string(),
            other => {
                return Err(format!(
                    "unknown override key '{other}' \
                     (expected dt, horizon, seed, frame_seed, integrator, orientation_frame, name)"
                ))
            }
        }
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("scenario parse error: {e}"))
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text =
            std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), String> {
        std::fs::write(path, self.to_json_pretty()).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Re-samples the initial positions around their current values until the
    /// scenario validates, keeping at most `attempts` tries per round.
    pub fn randomize_feasible_start(
        &mut self,
        spread: f64,
        attempts: usize,
        rng: &mut impl Rng,
    ) -> bool {
        let nominal = self.initial_positions.clone();
        for _ in 0..attempts {
            self.initial_positions = nominal
                .iter()
                .map(|p| {
                    *p + Vec2::new(
                        rng.random_range(-spread..spread),
                        rng.random_range(-spread..spread),
                    )
                })
                .collect();
            if self.validate().is_ok() {
                return true;
            }
        }
        self.initial_positions = nominal;
        self.validate().is_ok()
    }

    // ----- presets -------------------------------------------------------

    /// The six-agent maneuvering benchmark: a moving leader with a weaving
    /// velocity, a shrinking leader separation for a narrow passage, an
    /// orientation ramp onto the leader's heading, and per-agent sinusoidal
    /// disturbances. Targets form a triangle of four equilateral triangles.
    pub fn six_agent_maneuver() -> Scenario {
        fn sins(terms: &[(f64, f64, f64, Wave)]) -> ScalarSchedule {
            ScalarSchedule::Sinusoids {
                offset: 0.0,
                terms: terms
                    .iter()
                    .map(|&(amplitude, omega, phase, wave)| SinTerm {
                        amplitude,
                        omega,
                        phase,
                        wave,
                    })
                    .collect(),
            }
        }
        let leader_velocity = Vec2Schedule {
            x: ScalarSchedule::constant(1.25),
            y: sins(&[(FRAC_PI_4, FRAC_PI_6, 0.0, Wave::Cos)]),
        };
        let lateral = sins(&[(0.25, 3.0, FRAC_PI_3, Wave::Cos), (0.75, 2.0, -PI / 5.0, Wave::Sin)]);
        let surge = sins(&[(0.75, 4.0, PI / 5.0, Wave::Sin), (0.5, 2.0, 0.75 * PI, Wave::Sin)]);
        Scenario {
            name: "six_agent_maneuver".into(),
            agents: 6,
            edges: vec![
                (2, 1),
                (3, 1),
                (3, 2),
                (4, 2),
                (4, 3),
                (5, 2),
                (5, 4),
                (6, 3),
                (6, 4),
            ],
            desired: DesiredSpec::from_lengths(
                &[(2, 1), (3, 1), (3, 2), (4, 2), (4, 3), (5, 2), (5, 4), (6, 3), (6, 4)],
                1.875,
                &[4, 5],
            ),
            initial_positions: vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(-0.9, -2.4),
                Vec2::new(1.8, -1.4),
                Vec2::new(0.8, -3.8),
                Vec2::new(-1.6, -4.6),
                Vec2::new(3.4, -3.2),
            ],
            horizon: 40.0,
            dt: 1e-3,
            integrator: Integrator::Rk4,
            leader_velocity: leader_velocity.clone(),
            disturbances: vec![
                DisturbanceSpec { agent: 2, x: surge.clone(), y: lateral.clone() },
                DisturbanceSpec {
                    agent: 3,
                    x: sins(&[(0.75, 1.0, 0.0, Wave::Sin)]),
                    y: sins(&[(0.25, 1.0, FRAC_PI_6, Wave::Cos), (0.25, 2.0, FRAC_PI_4, Wave::Sin)]),
                },
                DisturbanceSpec {
                    agent: 4,
                    x: sins(&[(0.5, 5.0, PI / 8.0, Wave::Cos), (0.5, 1.0, PI / 5.0, Wave::Sin)]),
                    y: lateral.clone(),
                },
                DisturbanceSpec {
                    agent: 5,
                    x: lateral,
                    y: sins(&[(0.5, 1.0, 0.0, Wave::Cos)]),
                },
                DisturbanceSpec { agent: 6, x: sins(&[(0.5, 2.0, FRAC_PI_4, Wave::Sin)]), y: surge },
            ],
            d21_reference: Some(ScalarSchedule::PiecewiseSmooth {
                knots: vec![
                    Knot { t: 16.0, value: 1.875 },
                    Knot { t: 19.0, value: 1.25 },
                    Knot { t: 23.0, value: 1.25 },
                    Knot { t: 26.0, value: 1.875 },
                ],
            }),
            beta_reference: Some(ScalarSchedule::HeadingTracking {
                velocity: Box::new(leader_velocity),
                offset: -FRAC_PI_6,
                ramp_start: 13.0,
                ramp_end: 15.0,
            }),
            ppc: PpcParams {
                distance: PerfSpec { decay_rate: 0.5, rho_inf: 0.03 },
                bearing: PerfSpec { decay_rate: 0.5, rho_inf: 0.04 },
                ratio: PerfSpec { decay_rate: 0.5, rho_inf: 0.04 },
                angle: PerfSpec { decay_rate: 0.5, rho_inf: 0.04 },
            },
            frames: FramePolicy::Seeded,
            orientation_frame: 0.0,
            seed: 7,
            frame_seed: None,
            snapshot_times: None,
        }
    }

    /// Two agents, static leader, start exactly at the desired separation:
    /// the closed loop is a fixed point and nothing moves.
    pub fn two_agents_static() -> Scenario {
        Scenario {
            name: "two_agents_static".into(),
            agents: 2,
            edges: vec![(2, 1)],
            desired: DesiredSpec::from_lengths(&[(2, 1)], 1.5, &[]),
            initial_positions: vec![Vec2::new(0.0, 0.0), Vec2::new(-1.5, 0.0)],
            horizon: 5.0,
            dt: 1e-3,
            integrator: Integrator::Rk4,
            leader_velocity: Vec2Schedule::zero(),
            disturbances: vec![],
            d21_reference: None,
            beta_reference: None,
            ppc: PpcParams {
                distance: PerfSpec { decay_rate: 0.5, rho_inf: 0.2 },
                bearing: PerfSpec { decay_rate: 0.5, rho_inf: 0.2 },
                ratio: PerfSpec { decay_rate: 0.5, rho_inf: 0.2 },
                angle: PerfSpec { decay_rate: 0.5, rho_inf: 0.2 },
            },
            frames: FramePolicy::Aligned,
            orientation_frame: 0.0,
            seed: 1,
            frame_seed: None,
            snapshot_times: None,
        }
    }

    /// A randomly grown triangulated formation of `n` agents with a drifting
    /// leader and perturbed feasible starting positions.
    pub fn random_henneberg(n: usize, seed: u64) -> Result<Scenario, String> {
        if n < 3 {
            return Err("random growth needs at least 3 agents".into());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d21 = rng.random_range(1.5..2.5);
        let dir = rng.random_range(0.0..TAU);
        let mut graph = FormationGraph::leader_pair();
        let mut desired = DesiredFormation::leader_pair(d21).map_err(|e| e.to_string())?;
        let mut targets =
            vec![Vec2::ZERO, d21 * Vec2::new((dir + PI).cos(), (dir + PI).sin())];
        for k in 3..=n {
            let mut placed = false;
            for _ in 0..500 {
                let &(j, i) = &graph.edges()[rng.random_range(0..graph.edges().len())];
                let (t_i, t_j) = (targets[i - 1], targets[j - 1]);
                let d_ji = (t_i - t_j).norm();
                let mid = 0.5 * (t_i + t_j);
                let radius = d_ji * rng.random_range(0.7..1.3);
                let ang = rng.random_range(0.0..TAU);
                let cand = mid + radius * Vec2::new(ang.cos(), ang.sin());
                let d_ki = (cand - t_i).norm();
                let d_kj = (cand - t_j).norm();
                if !(0.8..=3.5).contains(&d_ki) || !(0.8..=3.5).contains(&d_kj) {
                    continue;
                }
                if (d_ki / d_kj).ln().abs() > 1.0 {
                    continue;
                }
                if targets.iter().any(|t| (cand - *t).norm() < 0.5) {
                    continue;
                }
                let bp = match crate::geometry::triangle_bipolar(t_i, t_j, cand) {
                    Ok(bp) => bp,
                    Err(_) => continue,
                };
                if bp.alpha < 0.35 || bp.alpha > TAU - 0.35 || (bp.alpha - PI).abs() < 0.05 {
                    continue;
                }
                match crate::graph::henneberg_extend(&graph, &desired, i, j, d_ki, d_kj, bp.alpha)
                {
                    Ok((g, d)) => {
                        graph = g;
                        desired = d;
                        targets.push(cand);
                        placed = true;
                        break;
                    }
                    Err(_) => continue,
                }
            }
            if !placed {
                return Err(format!("could not place follower {k} after 500 tries"));
            }
        }
        let distances = desired
            .distances()
            .iter()
            .map(|(&edge, &length)| EdgeLength { edge, length })
            .collect();
        let angles = desired
            .angles()
            .iter()
            .map(|(&follower, &alpha)| FollowerAngle { follower, alpha })
            .collect();
        let mut scenario = Scenario {
            name: format!("random_henneberg_{n}_{seed}"),
            agents: n,
            edges: graph.edges().to_vec(),
            desired: DesiredSpec { distances, angles, ratios: vec![], reflected: vec![] },
            initial_positions: targets,
            horizon: 10.0,
            dt: 5e-4,
            integrator: Integrator::Rk4,
            leader_velocity: Vec2Schedule::constant(0.3, 0.15),
            disturbances: vec![],
            d21_reference: None,
            beta_reference: None,
            ppc: PpcParams {
                distance: PerfSpec { decay_rate: 0.5, rho_inf: 0.15 },
                bearing: PerfSpec { decay_rate: 0.5, rho_inf: 0.15 },
                ratio: PerfSpec { decay_rate: 0.5, rho_inf: 0.15 },
                angle: PerfSpec { decay_rate: 0.5, rho_inf: 0.15 },
            },
            frames: FramePolicy::Seeded,
            orientation_frame: 0.0,
            seed,
            frame_seed: None,
            snapshot_times: None,
        };
        if !scenario.randomize_feasible_start(0.35, 100, &mut rng) {
            return Err("could not find a feasible perturbed start".into());
        }
        Ok(scenario)
    }

    /// Reference target placement for this scenario's shape (leader at the
    /// configured initial position, secondary leader bearing straight up).
    pub fn target_positions(&self) -> Result<Vec<Vec2>, String> {
        let desired = self.desired_formation()?;
        reconstruct_target_positions(
            &self.graph(),
            &desired,
            self.initial_positions.first().copied().unwrap_or(Vec2::ZERO),
            std::f64::consts::FRAC_PI_2,
        )
        .map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for scenario in [Scenario::six_agent_maneuver(), Scenario::two_agents_static()] {
            let report = scenario.validate();
            assert!(report.is_ok(), "{}: {report}", scenario.name);
        }
        let random = Scenario::random_henneberg(6, 3).unwrap();
        let report = random.validate();
        assert!(report.is_ok(), "{report}");
    }

    #[test]
    fn maneuver_channels_follow_the_selection_rules() {
        let scenario = Scenario::six_agent_maneuver();
        let channels = scenario.build_channels().unwrap();
        // Separation dips only once the envelope has settled, so the binding
        // instant is t = 0: 0.99 * 1.875^2.
        assert!((channels.distance.b_lower - 0.99 * 1.875 * 1.875).abs() < 1e-9);
        let desired = scenario.desired_formation().unwrap();
        let e0 = scenario.initial_errors(&desired).unwrap();
        assert!(e0.e_d > 0.0);
        assert!((channels.distance.b_upper - (2.0 * e0.e_d + 1.0)).abs() < 1e-12);
        // Bearing band: the reference starts at 0 with envelope 1.
        let b = channels.bearing.as_ref().unwrap();
        assert!((b.b_lower - 0.99 * PI).abs() < 1e-6);
        assert!(b.b_upper <= 0.99 * PI + 1e-12);
        // Followers: four channels, bands from the angle rule.
        assert_eq!(channels.followers.len(), 4);
        let f3 = &channels.followers[&3];
        assert!((f3.alpha_star - FRAC_PI_3).abs() < 1e-12);
        assert!((f3.angle.b_lower - f3.alpha_star).abs() < 1e-12);
        assert!((f3.angle.b_upper - (TAU - f3.alpha_star)).abs() < 1e-12);
    }

    #[test]
    fn maneuver_initial_occupancy_is_moderate() {
        // Healthy margins at t = 0 on every channel (below 60% of the band).
        let scenario = Scenario::six_agent_maneuver();
        let channels = scenario.build_channels().unwrap();
        let desired = scenario.desired_formation().unwrap();
        let e0 = scenario.initial_errors(&desired).unwrap();
        let occ = |e: f64, ch: &PpcChannel| {
            if e >= 0.0 {
                e / ch.b_upper
            } else {
                -e / ch.b_lower
            }
        };
        assert!(occ(e0.e_d, &channels.distance) < 0.6);
        assert!(occ(e0.e_beta.unwrap(), channels.bearing.as_ref().unwrap()) < 0.6);
        for (k, &(e_r, e_a)) in &e0.followers {
            let f = &channels.followers[k];
            assert!(occ(e_r, &f.ratio) < 0.6, "agent {k} ratio");
            assert!(occ(e_a, &f.angle) < 0.6, "agent {k} angle");
        }
    }

    #[test]
    fn scenario_json_round_trip() {
        let scenario = Scenario::six_agent_maneuver();
        let json = scenario.to_json_pretty();
        let back = Scenario::from_json(&json).unwrap();
        assert_eq!(scenario, back);
    }

    #[test]
    fn overrides_apply_and_reject_unknown_keys() {
        let mut s = Scenario::two_agents_static();
        s.apply_override("dt", "0.5").unwrap();
        s.apply_override("integrator", "euler").unwrap();
        s.apply_override("frame_seed", "9").unwrap();
        assert_eq!(s.dt, 0.5);
        assert_eq!(s.integrator, Integrator::Euler);
        assert_eq!(s.frame_seed, Some(9));
        assert!(s.apply_override("gravity", "10").is_err());
        assert!(s.apply_override("dt", "fast").is_err());
    }

    #[test]
    fn seeded_frames_are_deterministic_and_distinct() {
        let mut s = Scenario::six_agent_maneuver();
        let a = s.frame_angles();
        assert_eq!(a, s.frame_angles());
        s.frame_seed = Some(1234);
        let b = s.frame_angles();
        assert_ne!(a, b);
        assert_eq!(a.len(), 6);
        let mut aligned = s.clone();
        aligned.frames = FramePolicy::Aligned;
        assert!(aligned.frame_angles().iter().all(|&t| t == 0.0));
    }

    #[test]
    fn random_growth_is_reproducible() {
        let a = Scenario::random_henneberg(7, 42).unwrap();
        let b = Scenario::random_henneberg(7, 42).unwrap();
        assert_eq!(a, b);
        let c = Scenario::random_henneberg(7, 43).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.agents, 7);
        assert_eq!(a.edges.len(), 2 * 7 - 3);
    }

    #[test]
    fn infeasible_start_is_reported() {
        let mut s = Scenario::two_agents_static();
        // Nearly collocated leaders: below the funnel floor at t = 0.
        s.initial_positions[1] = Vec2::new(-0.05, 0.0);
        let report = s.validate();
        assert!(!report.is_ok());
        assert!(report.violations.iter().any(|v| v.contains("distance channel")));
    }

    #[test]
    fn target_positions_realize_the_shape() {
        let s = Scenario::six_agent_maneuver();
        let desired = s.desired_formation().unwrap();
        let targets = s.target_positions().unwrap();
        assert!(crate::oracles::strong_congruency_check(
            &targets,
            &s.graph(),
            &desired,
            1e-9
        ));
    }
}
