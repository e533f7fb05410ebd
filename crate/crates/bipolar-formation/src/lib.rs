//! Deterministic planar multi-agent formation control on a directed
//! triangulated graph, with every controlled error confined to a
//! user-prescribed shrinking funnel.
//!
//! A formation of `n` agents is steered by three kinds of controllers:
//!
//! * the **leader** (agent 1) follows an external velocity reference;
//! * the **secondary leader** (agent 2) regulates its squared distance to
//!   the leader — and optionally the pair's bearing in a designated
//!   reference frame — fixing the formation's scale and orientation;
//! * every **follower** `k >= 3` measures only the bearings and the distance
//!   ratio to its two anchor neighbors, and regulates that log ratio and the
//!   counterclockwise angle between the bearings.
//!
//! The follower pair (log ratio, angle) is a pair of orthogonal coordinates
//! centered on the anchors (a two-center bipolar chart); its basis vectors
//! and scale factor are in [`geometry`], the funnel machinery in [`ppc`],
//! the control laws in [`control`], and the fixed-step closed-loop engine
//! in [`sim`]. Independent numerical cross-checks of all of the math live
//! in [`oracles`] and are bundled into a runnable suite by [`verify`].
//!
//! Everything is deterministic: randomness only enters through explicit
//! seeds carried by [`scenario::Scenario`], and rerunning a scenario
//! reproduces its logs byte for byte.
//!
//! ```
//! use bipolar_formation::prelude::*;
//!
//! let mut scenario = Scenario::two_agents_static();
//! scenario.horizon = 0.5;
//! let result = run(&scenario).expect("valid scenario");
//! assert!(result.failure.is_none());
//! ```

pub mod app;
pub mod control;
pub mod geometry;
pub mod graph;
pub mod oracles;
pub mod output;
pub mod ppc;
pub mod scenario;
pub mod schedule;
pub mod sim;
pub mod vec2;
pub mod verify;

/// The handful of names almost every user needs.
pub mod prelude {
    pub use crate::graph::{DesiredFormation, FormationGraph};
    pub use crate::ppc::{PerformanceFunction, PpcChannel};
    pub use crate::scenario::Scenario;
    pub use crate::sim::{run, RunResult, SimError};
    pub use crate::vec2::Vec2;
    pub use crate::verify::run_suite;
}
