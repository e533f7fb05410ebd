//! Directed two-leader formation graphs and their desired-shape data.
//!
//! Vertices are 1-indexed. An edge (j, i) means "j measures i" and always
//! points from the higher index to a lower one, so the structure is acyclic
//! by construction: vertex 1 is the leader (senses nobody), vertex 2 senses
//! only vertex 1, and every vertex k >= 3 senses exactly two earlier vertices
//! i < j that are themselves connected by an edge (j, i). Graphs of this
//! family have exactly 2n - 3 edges and can be grown one vertex at a time.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Relative tolerance (with a unit floor) for shape-consistency checks.
pub const SHAPE_REL_TOL: f64 = 1e-9;

fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    /// New-vertex anchors must satisfy i < j <= n.
    #[error("invalid anchor pair ({i}, {j}) for a graph on {n} vertices")]
    BadNeighbors { i: usize, j: usize, n: usize },
    /// Angles must lie strictly inside (0, 2*pi).
    #[error("angle {0} outside the open interval (0, 2*pi)")]
    BadAngle(f64),
    /// Distances must be positive and finite.
    #[error("invalid distance {0}")]
    BadDistance(f64),
    /// The anchors of a new vertex must already be connected.
    #[error("required edge ({j}, {i}) is missing")]
    MissingEdge { j: usize, i: usize },
    /// The (d_ki, d_kj, alpha) triple contradicts the existing edge length.
    #[error("triangle over edge ({j}, {i}) incoherent: edge length {expected}, implied {implied}")]
    InconsistentTriangle { j: usize, i: usize, expected: f64, implied: f64 },
}

/// Outcome of a structural or shape validation pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ok() && self.warnings.is_empty() {
            return write!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "violation: {v}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// A directed sensing graph over agents 1..=n.
#[derive(Debug, Clone, PartialEq)]
pub struct FormationGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: BTreeMap<usize, (usize, usize)>,
}

impl FormationGraph {
    /// Builds a graph from raw edges (no validation beyond dedup/sorting;
    /// call [`validate_graph`] to check the structural rules).
    pub fn new(n: usize, mut edges: Vec<(usize, usize)>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let mut neighbors = BTreeMap::new();
        for k in 3..=n {
            let targets: Vec<usize> =
                edges.iter().filter(|&&(j, _)| j == k).map(|&(_, i)| i).collect();
            if let [i, j] = targets[..] {
                // Edges are sorted, so targets come out ascending: i < j.
                neighbors.insert(k, (i, j));
            }
        }
        FormationGraph { n, edges, neighbors }
    }

    /// The minimal graph: a leader pair 1 <- 2.
    pub fn leader_pair() -> Self {
        FormationGraph::new(2, vec![(2, 1)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges (j, i), sorted ascending.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, j: usize, i: usize) -> bool {
        self.edges.binary_search(&(j, i)).is_ok()
    }

    /// Ordered anchor pair (i, j) with i < j of follower k, if k has
    /// out-degree exactly 2.
    pub fn follower_anchors(&self, k: usize) -> Option<(usize, usize)> {
        self.neighbors.get(&k).copied()
    }

    /// Followers in construction order (every anchor precedes its follower).
    pub fn followers(&self) -> impl Iterator<Item = usize> + '_ {
        3..=self.n
    }
}

/// Checks the structural rules of the two-leader triangulated family.
pub fn validate_graph(graph: &FormationGraph) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = graph.n;
    if n < 2 {
        report.violations.push(format!("vertex count {n} below minimum 2"));
        return report;
    }
    for &(j, i) in &graph.edges {
        if i == 0 || j == 0 || i > n || j > n {
            report.violations.push(format!("edge ({j}, {i}) references a vertex outside 1..={n}"));
        } else if i >= j {
            report
                .violations
                .push(format!("edge ({j}, {i}) must point from a higher to a lower index"));
        }
    }
    if !report.violations.is_empty() {
        return report;
    }
    let out_degree = |v: usize| graph.edges.iter().filter(|&&(j, _)| j == v).count();
    if out_degree(1) != 0 {
        report.violations.push("vertex 1 (leader) must have no outgoing edges".into());
    }
    if out_degree(2) != 1 {
        report.violations.push(format!(
            "vertex 2 must measure exactly one vertex, has out-degree {}",
            out_degree(2)
        ));
    } else if !graph.has_edge(2, 1) {
        report.violations.push("vertex 2 must measure vertex 1".into());
    }
    for k in 3..=n {
        let d = out_degree(k);
        if d != 2 {
            report.violations.push(format!("vertex {k} must measure exactly two vertices, has out-degree {d}"));
            continue;
        }
        let (i, j) = graph.follower_anchors(k).expect("out-degree 2 implies anchors");
        if !graph.has_edge(j, i) {
            report.violations.push(format!(
                "triangulation: vertex {k} measures ({i}, {j}) but edge ({j}, {i}) is missing"
            ));
        }
    }
    let expected = 2 * n - 3;
    if graph.edges.len() != expected {
        report
            .violations
            .push(format!("edge count {} differs from 2n-3 = {expected}", graph.edges.len()));
    }
    report
}

/// Desired-shape data attached to a formation graph: an edge length for every
/// edge, plus a (log-ratio, angle) pair for every follower.
#[derive(Debug, Clone, PartialEq)]
pub struct DesiredFormation {
    distances: BTreeMap<(usize, usize), f64>,
    angles: BTreeMap<usize, f64>,
    ratios: BTreeMap<usize, f64>,
}

impl DesiredFormation {
    /// Shape data for the minimal leader pair.
    pub fn leader_pair(d21: f64) -> Result<Self, GraphError> {
        if !(d21 > 0.0) || !d21.is_finite() {
            return Err(GraphError::BadDistance(d21));
        }
        let mut distances = BTreeMap::new();
        distances.insert((2, 1), d21);
        Ok(DesiredFormation { distances, angles: BTreeMap::new(), ratios: BTreeMap::new() })
    }

    /// Builds shape data from raw per-edge / per-follower entries.
    pub fn from_parts(
        distances: BTreeMap<(usize, usize), f64>,
        angles: BTreeMap<usize, f64>,
        ratios: BTreeMap<usize, f64>,
    ) -> Self {
        DesiredFormation { distances, angles, ratios }
    }

    /// Derives angles and log ratios from edge lengths alone. Distances do
    /// not distinguish a follower from its mirror image across the anchor
    /// axis, so followers listed in `reflected` get the reflex angle
    /// 2*pi - alpha instead of the counterclockwise alpha in (0, pi).
    pub fn from_distances(
        graph: &FormationGraph,
        distances: BTreeMap<(usize, usize), f64>,
        reflected: &BTreeSet<usize>,
    ) -> Result<Self, GraphError> {
        for (&(j, i), &d) in &distances {
            if !(d > 0.0) || !d.is_finite() {
                return Err(GraphError::BadDistance(d));
            }
            let _ = (j, i);
        }
        let mut angles = BTreeMap::new();
        let mut ratios = BTreeMap::new();
        for k in graph.followers() {
            let (i, j) =
                graph.follower_anchors(k).ok_or(GraphError::BadNeighbors { i: 0, j: 0, n: k })?;
            let d_ki = *distances.get(&(k, i)).ok_or(GraphError::MissingEdge { j: k, i })?;
            let d_kj = *distances.get(&(k, j)).ok_or(GraphError::MissingEdge { j: k, i: j })?;
            let d_ji = *distances.get(&(j, i)).ok_or(GraphError::MissingEdge { j, i })?;
            let cos = (d_ki * d_ki + d_kj * d_kj - d_ji * d_ji) / (2.0 * d_ki * d_kj);
            if cos.abs() > 1.0 + SHAPE_REL_TOL {
                return Err(GraphError::InconsistentTriangle {
                    j,
                    i,
                    expected: d_ji,
                    implied: (d_ki * d_ki + d_kj * d_kj + 2.0 * d_ki * d_kj).sqrt(),
                });
            }
            let alpha = cos.clamp(-1.0, 1.0).acos();
            angles.insert(k, if reflected.contains(&k) { TAU - alpha } else { alpha });
            ratios.insert(k, (d_ki / d_kj).ln());
        }
        Ok(DesiredFormation { distances, angles, ratios })
    }

    pub fn distance(&self, j: usize, i: usize) -> Option<f64> {
        self.distances.get(&(j, i)).copied()
    }

    pub fn angle(&self, k: usize) -> Option<f64> {
        self.angles.get(&k).copied()
    }

    pub fn ratio(&self, k: usize) -> Option<f64> {
        self.ratios.get(&k).copied()
    }

    pub fn distances(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.distances
    }

    pub fn angles(&self) -> &BTreeMap<usize, f64> {
        &self.angles
    }

    pub fn ratios(&self) -> &BTreeMap<usize, f64> {
        &self.ratios
    }
}

/// Grows a graph and its shape data by one follower anchored at (i, j).
///
/// The new vertex k = n + 1 is assigned desired distances `d_ki`, `d_kj` and
/// the counterclockwise desired angle `alpha` (in (0, 2*pi)); its desired log
/// ratio follows as ln(d_ki / d_kj). The triple must cohere with the already
/// fixed anchor edge length via the law of cosines.
pub fn henneberg_extend(
    graph: &FormationGraph,
    desired: &DesiredFormation,
    i: usize,
    j: usize,
    d_ki: f64,
    d_kj: f64,
    alpha: f64,
) -> Result<(FormationGraph, DesiredFormation), GraphError> {
    let n = graph.n;
    if i == 0 || i >= j || j > n {
        return Err(GraphError::BadNeighbors { i, j, n });
    }
    if !(alpha > 0.0 && alpha < TAU) {
        return Err(GraphError::BadAngle(alpha));
    }
    for d in [d_ki, d_kj] {
        if !(d > 0.0) || !d.is_finite() {
            return Err(GraphError::BadDistance(d));
        }
    }
    if !graph.has_edge(j, i) {
        return Err(GraphError::MissingEdge { j, i });
    }
    let d_ji = desired.distance(j, i).ok_or(GraphError::MissingEdge { j, i })?;
    let implied_sq = d_ki * d_ki + d_kj * d_kj - 2.0 * d_ki * d_kj * alpha.cos();
    if !close_rel(implied_sq, d_ji * d_ji, SHAPE_REL_TOL) {
        return Err(GraphError::InconsistentTriangle {
            j,
            i,
            expected: d_ji,
            implied: implied_sq.max(0.0).sqrt(),
        });
    }
    let k = n + 1;
    let mut edges = graph.edges.clone();
    edges.push((k, i));
    edges.push((k, j));
    let new_graph = FormationGraph::new(k, edges);
    let mut new_desired = desired.clone();
    new_desired.distances.insert((k, i), d_ki);
    new_desired.distances.insert((k, j), d_kj);
    new_desired.angles.insert(k, alpha);
    new_desired.ratios.insert(k, (d_ki / d_kj).ln());
    Ok((new_graph, new_desired))
}

/// Checks shape data against its graph: positive finite lengths everywhere,
/// angles strictly inside (0, 2*pi), log ratios consistent with the length
/// pairs, and every follower triangle coherent under the law of cosines.
pub fn validate_desired(graph: &FormationGraph, desired: &DesiredFormation) -> ValidationReport {
    let mut report = ValidationReport::default();
    for &(j, i) in graph.edges() {
        match desired.distance(j, i) {
            None => report.violations.push(format!("edge ({j}, {i}) has no desired length")),
            Some(d) if !(d > 0.0) || !d.is_finite() => {
                report.violations.push(format!("edge ({j}, {i}) has invalid desired length {d}"))
            }
            _ => {}
        }
    }
    for (&(j, i), _) in &desired.distances {
        if !graph.has_edge(j, i) {
            report.violations.push(format!("desired length given for non-edge ({j}, {i})"));
        }
    }
    for k in graph.followers() {
        let Some((i, j)) = graph.follower_anchors(k) else {
            report.violations.push(format!("follower {k} lacks an anchor pair"));
            continue;
        };
        let Some(alpha) = desired.angle(k) else {
            report.violations.push(format!("follower {k} has no desired angle"));
            continue;
        };
        if !(alpha > 0.0 && alpha < TAU) {
            report
                .violations
                .push(format!("follower {k} desired angle {alpha} outside (0, 2*pi)"));
            continue;
        }
        if (alpha - PI).abs() <= 1e-9 {
            report.warnings.push(format!(
                "follower {k} desired angle is pi: target collinear with its anchors"
            ));
        }
        let Some(r) = desired.ratio(k) else {
            report.violations.push(format!("follower {k} has no desired log ratio"));
            continue;
        };
        let (Some(d_ki), Some(d_kj), Some(d_ji)) =
            (desired.distance(k, i), desired.distance(k, j), desired.distance(j, i))
        else {
            continue; // already reported as missing lengths
        };
        if !close_rel(r, (d_ki / d_kj).ln(), SHAPE_REL_TOL) {
            report.violations.push(format!(
                "follower {k} ratio mismatch: r = {r}, ln(d_ki/d_kj) = {}",
                (d_ki / d_kj).ln()
            ));
        }
        let implied_sq = d_ki * d_ki + d_kj * d_kj - 2.0 * d_ki * d_kj * alpha.cos();
        if !close_rel(implied_sq, d_ji * d_ji, SHAPE_REL_TOL) {
            report.violations.push(format!(
                "follower {k} triangle incoherent over edge ({j}, {i}): \
                 edge length {d_ji}, implied {}",
                implied_sq.max(0.0).sqrt()
            ));
        }
    }
    report
}
