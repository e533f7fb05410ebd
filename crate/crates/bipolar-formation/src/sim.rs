//! Fixed-step closed-loop simulation: sensing in rotated local frames,
//! per-agent control, additive disturbances, Euler or RK4 integration, and a
//! funnel-containment watchdog at every logged step.

use crate::control::{
    control, AgentParams, FollowerSnapshot, SecondarySnapshot, SensingSnapshot,
};
use crate::geometry::{bearing, edge_angle};
use crate::graph::FormationGraph;
use crate::scenario::{ChannelSet, Integrator, Scenario};
use crate::schedule::{ScalarSchedule, Vec2Schedule};
use crate::vec2::Vec2;
use serde::Serialize;
use std::fmt;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    InvalidScenario(Vec<String>),
    #[error("agent {agent} at t = {t}: {message}")]
    Control { agent: usize, t: f64, message: String },
    #[error(
        "agent {agent} channel {channel} left its funnel at t = {t}: \
         error {e} outside ({lo}, {hi})"
    )]
    OutOfBounds { agent: usize, channel: String, t: f64, e: f64, lo: f64, hi: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

/// Identity of one logged error channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelInfo {
    pub label: String,
    pub agent: usize,
    pub kind: String,
}

/// One channel measurement at one instant: the error, the funnel interval
/// it must stay inside, and the transformed (unconstrained) error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSample {
    pub e: f64,
    pub lo: f64,
    pub hi: f64,
    pub sigma: f64,
}

/// One logged instant.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub positions: Vec<Vec2>,
    /// Control commands in the global frame (disturbances excluded).
    pub commands: Vec<Vec2>,
    pub channels: Vec<ChannelSample>,
    pub edge_lengths: Vec<f64>,
}

/// Complete run trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub channels: Vec<ChannelInfo>,
    pub edges: Vec<(usize, usize)>,
    pub rows: Vec<LogRow>,
}

/// Post-run report for one channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelReport {
    pub channel: String,
    pub agent: usize,
    pub kind: String,
    pub decay_rate: f64,
    pub rho_inf: f64,
    pub b_lower: f64,
    pub b_upper: f64,
    pub policy: String,
    /// Worst fraction of the available funnel width used, over the run.
    pub max_band_occupancy: f64,
    /// Largest |error| inside the final window of the run.
    pub steady_state_max_abs_error: f64,
}

/// Machine-readable run summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub agents: usize,
    pub seed: u64,
    pub frame_seed: u64,
    pub integrator: String,
    pub dt: f64,
    pub horizon: f64,
    pub steps_completed: usize,
    pub wall_clock_seconds: f64,
    /// Resolved local-frame rotation of each agent.
    pub frames: Vec<f64>,
    /// Smallest neighbor (edge) distance seen at any logged step.
    pub min_neighbor_distance: f64,
    pub failure: Option<String>,
    pub channels: Vec<ChannelReport>,
}

/// Everything a finished run produces. `failure` is set when the run stopped
/// early (funnel exit, geometric collapse, numeric blow-up); the log then
/// holds the trace up to and including the failing instant.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub log: TrajectoryLog,
    pub summary: RunSummary,
    pub failure: Option<SimError>,
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {} agents, {} steps of dt = {} ({} s horizon), wall {:.3} s",
            self.scenario,
            self.agents,
            self.steps_completed,
            self.dt,
            self.horizon,
            self.wall_clock_seconds
        )?;
        writeln!(f, "  min neighbor distance: {:.6}", self.min_neighbor_distance)?;
        match &self.failure {
            Some(msg) => writeln!(f, "  FAILED: {msg}")?,
            None => writeln!(f, "  all {} channels stayed in their funnels", self.channels.len())?,
        }
        for c in &self.channels {
            writeln!(
                f,
                "  {:<10} agent {}: occupancy {:.3}, steady |e| <= {:.5}",
                c.channel, c.agent, c.max_band_occupancy, c.steady_state_max_abs_error
            )?;
        }
        Ok(())
    }
}

/// Scenario compiled to run form: resolved frames, channels, and schedules.
pub struct Prepared {
    scenario: Scenario,
    graph: FormationGraph,
    channels: ChannelSet,
    frames: Vec<f64>,
    d21: ScalarSchedule,
    params: Vec<AgentParams>,
    disturbances: Vec<Vec2Schedule>,
    infos: Vec<ChannelInfo>,
}

impl Prepared {
    pub fn new(scenario: &Scenario) -> Result<Self, SimError> {
        let report = scenario.validate();
        if !report.is_ok() {
            return Err(SimError::InvalidScenario(report.violations));
        }
        let graph = scenario.graph();
        let desired = scenario.desired_formation().map_err(|e| SimError::InvalidScenario(vec![e]))?;
        let channels = scenario.build_channels().map_err(SimError::InvalidScenario)?;
        let frames = scenario.frame_angles();
        let d21 = scenario.resolved_d21(&desired);
        let mut params = vec![AgentParams::Leader];
        params.push(AgentParams::Secondary {
            distance: channels.distance.clone(),
            bearing: channels.bearing.clone(),
        });
        let mut infos = vec![ChannelInfo {
            label: "e_d".into(),
            agent: 2,
            kind: "distance".into(),
        }];
        if channels.bearing.is_some() {
            infos.push(ChannelInfo { label: "e_beta".into(), agent: 2, kind: "bearing".into() });
        }
        for (&k, fc) in &channels.followers {
            params.push(AgentParams::Follower {
                ratio: fc.ratio.clone(),
                angle: fc.angle.clone(),
                r_star: fc.r_star,
                alpha_star: fc.alpha_star,
            });
            infos.push(ChannelInfo { label: format!("e_r{k}"), agent: k, kind: "ratio".into() });
            infos.push(ChannelInfo {
                label: format!("e_alpha{k}"),
                agent: k,
                kind: "angle".into(),
            });
        }
        let disturbances = (1..=scenario.agents).map(|a| scenario.disturbance(a)).collect();
        Ok(Prepared {
            scenario: scenario.clone(),
            graph,
            channels,
            frames,
            d21,
            params,
            disturbances,
            infos,
        })
    }

    pub fn channel_infos(&self) -> &[ChannelInfo] {
        &self.infos
    }

    pub fn frames(&self) -> &[f64] {
        &self.frames
    }

    /// Builds the sensing snapshot of one agent (1-based), expressed in that
    /// agent's local frame.
    fn sense(&self, positions: &[Vec2], t: f64, agent: usize) -> Result<SensingSnapshot, String> {
        let rot = self.frames[agent - 1];
        match agent {
            1 => {
                // The leader follows a globally specified reference velocity,
                // expressed here in its own frame.
                let v = self.scenario.leader_velocity.eval(t);
                Ok(SensingSnapshot::Leader { velocity_ref: v.rotated(-rot) })
            }
            2 => {
                let z21 = bearing(positions[1], positions[0]).map_err(|e| e.to_string())?;
                let dist21 = (positions[0] - positions[1]).norm();
                Ok(SensingSnapshot::Secondary(SecondarySnapshot {
                    z21: z21.rotated(-rot),
                    dist21,
                    d_star: self.d21.eval(t),
                    beta_star: self.scenario.beta_reference.as_ref().map(|s| s.eval(t)),
                    ref_rotation: rot - self.scenario.orientation_frame,
                }))
            }
            k => {
                let (i, j) = self
                    .graph
                    .follower_anchors(k)
                    .ok_or_else(|| format!("agent {k} has no anchor pair"))?;
                let z_ki = bearing(positions[k - 1], positions[i - 1]).map_err(|e| e.to_string())?;
                let z_kj = bearing(positions[k - 1], positions[j - 1]).map_err(|e| e.to_string())?;
                let d_ki = (positions[i - 1] - positions[k - 1]).norm();
                let d_kj = (positions[j - 1] - positions[k - 1]).norm();
                Ok(SensingSnapshot::Follower(FollowerSnapshot {
                    z_ki: z_ki.rotated(-rot),
                    z_kj: z_kj.rotated(-rot),
                    ratio: d_ki / d_kj,
                }))
            }
        }
    }

    /// Control commands (global frame) and state derivatives at `(t, x)`.
    fn velocities(&self, positions: &[Vec2], t: f64) -> Result<(Vec<Vec2>, Vec<Vec2>), SimError> {
        let n = self.scenario.agents;
        let mut commands = Vec::with_capacity(n);
        let mut derivs = Vec::with_capacity(n);
        for agent in 1..=n {
            let snapshot = self
                .sense(positions, t, agent)
                .map_err(|message| SimError::Control { agent, t, message })?;
            let command = control(&snapshot, &self.params[agent - 1], t)
                .map_err(|e| SimError::Control { agent, t, message: e.to_string() })?;
            let u_global = command.velocity.rotated(self.frames[agent - 1]);
            let delta = self.disturbances[agent - 1].eval(t);
            commands.push(u_global);
            derivs.push(u_global + delta);
        }
        Ok((commands, derivs))
    }

    /// Measures every logged channel at `(t, x)` in the global frame.
    fn measure(&self, positions: &[Vec2], t: f64) -> Result<Vec<ChannelSample>, SimError> {
        let mut samples = Vec::with_capacity(self.infos.len());
        let z21 = bearing(positions[1], positions[0])
            .map_err(|e| SimError::Control { agent: 2, t, message: e.to_string() })?;
        let dist21 = (positions[0] - positions[1]).norm();
        let d_star = self.d21.eval(t);
        let mut push = |channel: &crate::ppc::PpcChannel, e: f64, t: f64| {
            let (lo, hi) = channel.band_at(t);
            let rho = channel.rho(t);
            let sigma = channel.transform(e / rho).unwrap_or(f64::NAN);
            samples.push(ChannelSample { e, lo, hi, sigma });
        };
        push(&self.channels.distance, dist21 * dist21 - d_star * d_star, t);
        if let (Some(ch), Some(bs)) = (&self.channels.bearing, &self.scenario.beta_reference) {
            let beta = z21.rotated(-self.scenario.orientation_frame).angle();
            push(ch, beta - bs.eval(t), t);
        }
        for (&k, fc) in &self.channels.followers {
            let (i, j) = self.graph.follower_anchors(k).expect("validated anchors");
            let z_ki = bearing(positions[k - 1], positions[i - 1])
                .map_err(|e| SimError::Control { agent: k, t, message: e.to_string() })?;
            let z_kj = bearing(positions[k - 1], positions[j - 1])
                .map_err(|e| SimError::Control { agent: k, t, message: e.to_string() })?;
            let alpha = edge_angle(z_ki, z_kj)
                .map_err(|e| SimError::Control { agent: k, t, message: e.to_string() })?;
            let d_ki = (positions[i - 1] - positions[k - 1]).norm();
            let d_kj = (positions[j - 1] - positions[k - 1]).norm();
            push(&fc.ratio, (d_ki / d_kj).ln() - fc.r_star, t);
            push(&fc.angle, alpha - fc.alpha_star, t);
        }
        Ok(samples)
    }

    /// Advances one step of size `dt` from `(t, x)`.
    fn advance(&self, positions: &[Vec2], t: f64, dt: f64) -> Result<Vec<Vec2>, SimError> {
        let add = |x: &[Vec2], v: &[Vec2], h: f64| -> Vec<Vec2> {
            x.iter().zip(v).map(|(p, d)| *p + h * *d).collect()
        };
        match self.scenario.integrator {
            Integrator::Euler => {
                let (_, k1) = self.velocities(positions, t)?;
                Ok(add(positions, &k1, dt))
            }
            Integrator::Rk4 => {
                let (_, k1) = self.velocities(positions, t)?;
                let (_, k2) = self.velocities(&add(positions, &k1, 0.5 * dt), t + 0.5 * dt)?;
                let (_, k3) = self.velocities(&add(positions, &k2, 0.5 * dt), t + 0.5 * dt)?;
                let (_, k4) = self.velocities(&add(positions, &k3, dt), t + dt)?;
                Ok(positions
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        *p + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                    })
                    .collect())
            }
        }
    }
}

/// Runs a scenario to completion (or to its first failure).
///
/// Returns `Err` only when the scenario itself is invalid; a run that starts
/// and then fails mid-flight yields `Ok` with `failure` set and a partial log.
pub fn run(scenario: &Scenario) -> Result<RunResult, SimError> {
    let prep = Prepared::new(scenario)?;
    let started = Instant::now();
    let dt = scenario.dt;
    let steps = (scenario.horizon / dt).ceil() as usize;
    let window_start = scenario.horizon - (0.2 * scenario.horizon).min(2.0);

    let mut positions = scenario.initial_positions.clone();
    let mut rows: Vec<LogRow> = Vec::with_capacity(steps + 1);
    let mut failure: Option<SimError> = None;
    let mut min_edge = f64::INFINITY;
    let mut max_occ = vec![0.0f64; prep.infos.len()];
    let mut steady = vec![0.0f64; prep.infos.len()];

    'main: for k in 0..=steps {
        let t = k as f64 * dt;
        let row = match prep
            .velocities(&positions, t)
            .and_then(|(commands, _)| Ok((commands, prep.measure(&positions, t)?)))
        {
            Ok((commands, channels)) => {
                let edge_lengths: Vec<f64> = prep
                    .graph
                    .edges()
                    .iter()
                    .map(|&(j, i)| (positions[i - 1] - positions[j - 1]).norm())
                    .collect();
                LogRow { t, positions: positions.clone(), commands, channels, edge_lengths }
            }
            Err(e) => {
                failure = Some(e);
                break 'main;
            }
        };
        for d in &row.edge_lengths {
            min_edge = min_edge.min(*d);
        }
        for (idx, s) in row.channels.iter().enumerate() {
            let occ = if s.e >= 0.0 { s.e / s.hi } else { s.e / s.lo };
            max_occ[idx] = max_occ[idx].max(occ);
            if t >= window_start {
                steady[idx] = steady[idx].max(s.e.abs());
            }
            if (s.e <= s.lo || s.e >= s.hi) && failure.is_none() {
                let info = &prep.infos[idx];
                failure = Some(SimError::OutOfBounds {
                    agent: info.agent,
                    channel: info.label.clone(),
                    t,
                    e: s.e,
                    lo: s.lo,
                    hi: s.hi,
                });
            }
        }
        let stop = failure.is_some();
        rows.push(row);
        if stop || k == steps {
            break;
        }
        match prep.advance(&positions, t, dt) {
            Ok(next) => {
                if next.iter().any(|p| !p.is_finite()) {
                    failure = Some(SimError::NonFinite { t: t + dt });
                    break;
                }
                positions = next;
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }

    let mut reports = Vec::with_capacity(prep.infos.len());
    for (idx, info) in prep.infos.iter().enumerate() {
        let ch = match info.kind.as_str() {
            "distance" => &prep.channels.distance,
            "bearing" => prep.channels.bearing.as_ref().expect("bearing channel exists"),
            "ratio" => &prep.channels.followers[&info.agent].ratio,
            _ => &prep.channels.followers[&info.agent].angle,
        };
        reports.push(ChannelReport {
            channel: info.label.clone(),
            agent: info.agent,
            kind: info.kind.clone(),
            decay_rate: ch.perf.decay_rate,
            rho_inf: ch.perf.rho_inf,
            b_lower: ch.b_lower,
            b_upper: ch.b_upper,
            policy: ch.policy.clone(),
            max_band_occupancy: max_occ[idx],
            steady_state_max_abs_error: steady[idx],
        });
    }
    let summary = RunSummary {
        scenario: scenario.name.clone(),
        agents: scenario.agents,
        seed: scenario.seed,
        frame_seed: scenario.frame_seed.unwrap_or(scenario.seed),
        integrator: match scenario.integrator {
            Integrator::Euler => "euler".into(),
            Integrator::Rk4 => "rk4".into(),
        },
        dt,
        horizon: scenario.horizon,
        steps_completed: rows.len().saturating_sub(1),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        frames: prep.frames.clone(),
        min_neighbor_distance: min_edge,
        failure: failure.as_ref().map(|e| e.to_string()),
        channels: reports,
    };
    Ok(RunResult {
        log: TrajectoryLog {
            channels: prep.infos.clone(),
            edges: prep.graph.edges().to_vec(),
            rows,
        },
        summary,
        failure,
    })
}
