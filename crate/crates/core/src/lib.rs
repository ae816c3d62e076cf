//! Guided sampling-based motion planning for a rectangle robot in planar
//! polygonal worlds.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`]: vectors, poses, polygons, separating-axis collision and rasterization.
//! * [`cspace`]: the SE(2) configuration space (validity, metric, local planner, sampling).
//! * [`tree`]: the search tree and the guided-search loop.
//! * [`guidance`]: the guiding-space trait plus uniform, goal-distance and Voronoi guidance.
//! * [`strategies`]: lazy roadmap, medial axis, path database and hybrid guidance.
//! * [`metric`]: oracle cost-to-go, the smoothed target distribution and divergences.
//! * [`bench`]: environment catalog, experiment runner and reporting.

pub mod bench;
pub mod cspace;
pub mod error;
pub mod geometry;
pub mod guidance;
pub mod metric;
pub mod par;
pub mod strategies;
pub mod tree;

pub use cspace::{CSpace, CSpaceParams, LocalPlan, PlannerRng, Task};
pub use error::{GuideError, Result};
pub use geometry::{Aabb, EnvironmentDesc, Polygon, Pose, RectRobot, Vec2};
pub use guidance::{GuidanceDistribution, GuidingSpace, Selection};
pub use tree::{guided_search, SearchOptions, SearchOutcome, SearchTree};
