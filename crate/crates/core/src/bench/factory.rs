//! Strategy names and per-seed guidance construction.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cspace::{planner_rng, CSpace, Task};
use crate::error::{GuideError, Result};
use crate::guidance::{GoalDistanceGuidance, GuidingSpace, UniformGuidance, VoronoiGuidance};
use crate::strategies::{
    build_skeleton, HybridGuidance, LazyGuidance, LazyParams, MedialAxisGuidance, MedialParams, PathDatabase,
    PathDbGuidance, PreparedDatabase, SkeletonGraph,
};

pub const STRATEGY_NAMES: &str = "uniform, goal, voronoi, lazyprm, medialaxis, pathdb, hybrid:<name>+<name>[+...]";

/// Stream used for strategy-private preprocessing (roadmap sampling).
const BUILD_STREAM: u64 = 0x4255;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrategySpec {
    Uniform,
    Goal,
    Voronoi,
    LazyPrm,
    MedialAxis,
    PathDb,
    Hybrid(Vec<StrategySpec>),
}

impl StrategySpec {
    fn uses(&self, f: &dyn Fn(&StrategySpec) -> bool) -> bool {
        match self {
            StrategySpec::Hybrid(m) => m.iter().any(|s| s.uses(f)),
            s => f(s),
        }
    }

    pub fn needs_skeleton(&self) -> bool {
        self.uses(&|s| *s == StrategySpec::MedialAxis)
    }

    pub fn needs_database(&self) -> bool {
        self.uses(&|s| *s == StrategySpec::PathDb)
    }

    pub fn is_voronoi(&self) -> bool {
        *self == StrategySpec::Voronoi
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::Uniform => f.write_str("uniform"),
            StrategySpec::Goal => f.write_str("goal"),
            StrategySpec::Voronoi => f.write_str("voronoi"),
            StrategySpec::LazyPrm => f.write_str("lazyprm"),
            StrategySpec::MedialAxis => f.write_str("medialaxis"),
            StrategySpec::PathDb => f.write_str("pathdb"),
            StrategySpec::Hybrid(m) => {
                let names: Vec<String> = m.iter().map(|s| s.to_string()).collect();
                write!(f, "hybrid:{}", names.join("+"))
            }
        }
    }
}

impl FromStr for StrategySpec {
    type Err = GuideError;
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || GuideError::UnknownName { kind: "strategy", name: s.into(), valid: STRATEGY_NAMES.into() };
        if let Some(rest) = s.strip_prefix("hybrid:") {
            let members = rest
                .split('+')
                .map(|m| match m.parse::<StrategySpec>() {
                    Ok(StrategySpec::Hybrid(_)) | Err(_) => Err(unknown()),
                    Ok(x) => Ok(x),
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(StrategySpec::Hybrid(members));
        }
        match s {
            "uniform" => Ok(StrategySpec::Uniform),
            "goal" => Ok(StrategySpec::Goal),
            "voronoi" | "rrt" => Ok(StrategySpec::Voronoi),
            "lazyprm" => Ok(StrategySpec::LazyPrm),
            "medialaxis" => Ok(StrategySpec::MedialAxis),
            "pathdb" => Ok(StrategySpec::PathDb),
            _ => Err(unknown()),
        }
    }
}

/// Strategy knobs. `None` means "derive the default from the C-space".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyParams {
    pub epsilon_greedy: f64,
    pub n_mc: usize,
    pub lazy_n_vertices: usize,
    pub lazy_k_neighbors: usize,
    pub r_del: Option<f64>,
    pub skeleton_cell: Option<f64>,
    pub skeleton_min_clearance: Option<f64>,
    pub w_penalty: f64,
    pub r_filter: Option<f64>,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            epsilon_greedy: 0.1,
            n_mc: 4096,
            lazy_n_vertices: 300,
            lazy_k_neighbors: 8,
            r_del: None,
            skeleton_cell: None,
            skeleton_min_clearance: None,
            w_penalty: 2.0,
            r_filter: None,
        }
    }
}

impl StrategyParams {
    /// Fills every `None` from the C-space.
    pub fn resolved(&self, cs: &CSpace) -> StrategyParams {
        let lazy = LazyParams::defaults_for(cs);
        let medial = MedialParams::defaults_for(cs);
        StrategyParams {
            r_del: Some(self.r_del.unwrap_or(lazy.r_del)),
            skeleton_cell: Some(self.skeleton_cell.unwrap_or(medial.cell_size)),
            skeleton_min_clearance: Some(self.skeleton_min_clearance.unwrap_or(medial.min_clearance)),
            r_filter: Some(self.r_filter.unwrap_or(2.0 * cs.step_size())),
            ..self.clone()
        }
    }

    fn medial(&self, cs: &CSpace) -> MedialParams {
        let r = self.resolved(cs);
        MedialParams {
            cell_size: r.skeleton_cell.unwrap(),
            min_clearance: r.skeleton_min_clearance.unwrap(),
            w_penalty: r.w_penalty,
        }
    }
}

/// Shared, read-only inputs for building one guidance per seed.
pub struct StrategyFactory {
    pub spec: StrategySpec,
    pub params: StrategyParams,
    skeleton: Option<Arc<SkeletonGraph>>,
    database: Option<Arc<PreparedDatabase>>,
}

impl StrategyFactory {
    pub fn new(
        spec: StrategySpec,
        params: StrategyParams,
        cs: &CSpace,
        database: Option<&PathDatabase>,
    ) -> Result<Self> {
        let params = params.resolved(cs);
        let skeleton = if spec.needs_skeleton() { Some(Arc::new(build_skeleton(cs, &params.medial(cs))?)) } else { None };
        let database = if spec.needs_database() {
            let db = database.ok_or(GuideError::EmptyDatabase)?;
            Some(Arc::new(PreparedDatabase::new(cs, db)?))
        } else {
            None
        };
        Ok(StrategyFactory { spec, params, skeleton, database })
    }

    /// Reuses already prepared shared inputs.
    pub fn with_shared(
        spec: StrategySpec,
        params: StrategyParams,
        skeleton: Option<Arc<SkeletonGraph>>,
        database: Option<Arc<PreparedDatabase>>,
    ) -> Self {
        StrategyFactory { spec, params, skeleton, database }
    }

    pub fn skeleton(&self) -> Option<&Arc<SkeletonGraph>> {
        self.skeleton.as_ref()
    }

    pub fn build(&self, cs: &CSpace, task: &Task, seed: u64) -> Result<Box<dyn GuidingSpace>> {
        self.build_spec(&self.spec, cs, task, seed)
    }

    fn build_spec(&self, spec: &StrategySpec, cs: &CSpace, task: &Task, seed: u64) -> Result<Box<dyn GuidingSpace>> {
        let p = &self.params;
        let fallback = || VoronoiGuidance::new(p.n_mc, seed);
        Ok(match spec {
            StrategySpec::Uniform => Box::new(UniformGuidance),
            StrategySpec::Goal => Box::new(GoalDistanceGuidance::new(p.epsilon_greedy)),
            StrategySpec::Voronoi => Box::new(fallback()),
            StrategySpec::LazyPrm => {
                let lp = LazyParams {
                    n_vertices: p.lazy_n_vertices,
                    k_neighbors: p.lazy_k_neighbors,
                    r_del: p.r_del.unwrap_or_else(|| LazyParams::defaults_for(cs).r_del),
                };
                let mut rng = planner_rng(seed, BUILD_STREAM);
                Box::new(LazyGuidance::build(cs, task, lp, &mut rng, fallback())?)
            }
            StrategySpec::MedialAxis => {
                let graph = self.skeleton.clone().ok_or(GuideError::EmptySkeleton)?;
                Box::new(MedialAxisGuidance::new(graph, &task.goal, p.w_penalty, fallback())?)
            }
            StrategySpec::PathDb => {
                let db = self.database.clone().ok_or(GuideError::EmptyDatabase)?;
                let r = p.r_filter.unwrap_or(2.0 * cs.step_size());
                Box::new(PathDbGuidance::new(db, r, fallback())?)
            }
            StrategySpec::Hybrid(members) => {
                let m = members.iter().map(|s| self.build_spec(s, cs, task, seed)).collect::<Result<Vec<_>>>()?;
                Box::new(HybridGuidance::new(m)?)
            }
        })
    }
}
