//! Experience-based guidance: retrieve a stored path from a related problem
//! and rank tree nodes by how close they are to finishing it.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cspace::{planner_rng, CSpace, PlannerRng};
use crate::error::{GuideError, Result};
use crate::geometry::{EnvironmentDesc, Pose};
use crate::guidance::{GuidanceDistribution, GuidingSpace, SelectContext, Selection, VoronoiGuidance};
use crate::par;
use crate::tree::{guided_search, FailedExpansion, SearchOptions, SearchTree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbEntry {
    pub start: [f64; 3],
    pub goal: [f64; 3],
    pub waypoints: Vec<[f64; 3]>,
    pub length: f64,
    pub env_seed: u64,
}

impl DbEntry {
    pub fn poses(&self) -> Vec<Pose> {
        self.waypoints.iter().map(|&w| w.into()).collect()
    }
}

/// Serialized as a bare JSON list of entries.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathDatabase {
    pub entries: Vec<DbEntry>,
}

impl PathDatabase {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// First `n` entries.
    pub fn prefix(&self, n: usize) -> PathDatabase {
        PathDatabase { entries: self.entries[..n.min(self.entries.len())].to_vec() }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbBuildParams {
    pub budget: usize,
    pub shortcut_attempts: usize,
    /// Voronoi Monte Carlo size (unused by the planner, kept for the fallback).
    pub n_mc: usize,
}

impl Default for DbBuildParams {
    fn default() -> Self {
        DbBuildParams { budget: 20_000, shortcut_attempts: 500, n_mc: 4096 }
    }
}

/// Random shortcutting: replaces sub-paths by straight edges when the local
/// planner accepts them. Never lengthens the path.
pub fn shortcut(cs: &CSpace, path: &[Pose], attempts: usize, rng: &mut PlannerRng) -> Vec<Pose> {
    let mut p = path.to_vec();
    for _ in 0..attempts {
        if p.len() < 3 {
            break;
        }
        let i = rng.random_range(0..p.len() - 2);
        let j = rng.random_range(i + 2..p.len());
        let direct = cs.distance(&p[i], &p[j]);
        let via = cs.path_length(&p[i..=j]);
        if direct < via && cs.local_plan(&p[i], &p[j]).is_valid() {
            p.drain(i + 1..j);
        }
    }
    p
}

struct Solved {
    entry: DbEntry,
    raw_length: f64,
}

fn solve_one(generate: &(dyn Fn(u64) -> Result<EnvironmentDesc> + Sync), env_seed: u64, params: &DbBuildParams) -> Result<Option<Solved>> {
    let desc = generate(env_seed)?;
    let (cs, task) = CSpace::from_desc(&desc)?;
    let mut rng = planner_rng(env_seed, 1);
    let mut guidance = VoronoiGuidance::new(params.n_mc, env_seed);
    let out = guided_search(&cs, &task, &mut guidance, params.budget, &mut rng, SearchOptions::default())?;
    let Some(path) = out.path else { return Ok(None) };
    let raw_length = cs.path_length(&path);
    let smooth = shortcut(&cs, &path, params.shortcut_attempts, &mut rng);
    Ok(Some(Solved {
        entry: DbEntry {
            start: task.start.to_array(),
            goal: task.goal.to_array(),
            length: cs.path_length(&smooth),
            waypoints: smooth.iter().map(|p| p.to_array()).collect(),
            env_seed,
        },
        raw_length,
    }))
}

/// Builds `n_entries` entries from instances drawn by `generate`, keyed by
/// seeds from `rng`. Unsolved instances are skipped.
pub fn db_build(
    generate: &(dyn Fn(u64) -> Result<EnvironmentDesc> + Sync),
    n_entries: usize,
    rng: &mut PlannerRng,
    params: &DbBuildParams,
) -> Result<PathDatabase> {
    Ok(db_build_with_raw(generate, n_entries, rng, params)?.0)
}

/// Like [`db_build`] but also returns each entry's pre-smoothing length.
pub fn db_build_with_raw(
    generate: &(dyn Fn(u64) -> Result<EnvironmentDesc> + Sync),
    n_entries: usize,
    rng: &mut PlannerRng,
    params: &DbBuildParams,
) -> Result<(PathDatabase, Vec<f64>)> {
    if n_entries == 0 {
        return Err(GuideError::InvalidParameter("database needs at least one entry".into()));
    }
    let max_attempts = 10 * n_entries;
    let mut entries = Vec::with_capacity(n_entries);
    let mut raw = Vec::with_capacity(n_entries);
    let mut attempts = 0;
    while entries.len() < n_entries {
        let want = (n_entries - entries.len()).min(max_attempts - attempts);
        if want == 0 {
            return Err(GuideError::Unsolvable(attempts));
        }
        let seeds: Vec<u64> = (0..want).map(|_| rng.random()).collect();
        attempts += want;
        for r in par::map(&seeds, |&s| solve_one(generate, s, params)) {
            if let Some(s) = r? {
                if entries.len() < n_entries {
                    raw.push(s.raw_length);
                    entries.push(s.entry);
                }
            }
        }
    }
    Ok((PathDatabase { entries }, raw))
}

/// An entry resampled at step-size spacing, with remaining arc length.
#[derive(Debug, Clone)]
pub struct PreparedEntry {
    pub start: Pose,
    pub goal: Pose,
    pub points: Vec<Pose>,
    pub remaining: Vec<f64>,
}

/// Database entries densified for one C-space metric.
#[derive(Debug, Clone)]
pub struct PreparedDatabase {
    pub entries: Vec<PreparedEntry>,
}

impl PreparedDatabase {
    pub fn new(cs: &CSpace, db: &PathDatabase) -> Result<Self> {
        if db.is_empty() {
            return Err(GuideError::EmptyDatabase);
        }
        let step = cs.step_size();
        let entries = db
            .entries
            .iter()
            .map(|e| {
                let wp = e.poses();
                let mut points = vec![wp[0]];
                for w in wp.windows(2) {
                    let n = (cs.distance(&w[0], &w[1]) / step).ceil().max(1.0) as usize;
                    points.extend((1..=n).map(|k| cs.interpolate(&w[0], &w[1], k as f64 / n as f64)));
                }
                let mut remaining = vec![0.0; points.len()];
                for k in (0..points.len() - 1).rev() {
                    remaining[k] = remaining[k + 1] + cs.distance(&points[k], &points[k + 1]);
                }
                PreparedEntry { start: e.start.into(), goal: e.goal.into(), points, remaining }
            })
            .collect();
        Ok(PreparedDatabase { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Alive entry with the most similar task; ties go to the lowest index.
    pub fn query(&self, cs: &CSpace, start: &Pose, goal: &Pose, alive: &[bool]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (k, e) in self.entries.iter().enumerate() {
            if !alive[k] {
                continue;
            }
            let d = cs.distance(start, &e.start) + cs.distance(goal, &e.goal);
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((k, d));
            }
        }
        best.map(|(k, _)| k)
    }
}

/// Per-node view of the queried path.
#[derive(Debug, Clone, Copy)]
struct NodeLink {
    waypoint: usize,
    /// Metric distance from the node to `waypoint`.
    offset: f64,
    h: f64,
}

pub struct PathDbGuidance {
    db: Arc<PreparedDatabase>,
    alive: Vec<bool>,
    r_filter: f64,
    query: Option<usize>,
    links: Vec<NodeLink>,
    fallback: VoronoiGuidance,
}

impl PathDbGuidance {
    pub fn new(db: Arc<PreparedDatabase>, r_filter: f64, fallback: VoronoiGuidance) -> Result<Self> {
        if db.is_empty() {
            return Err(GuideError::EmptyDatabase);
        }
        let alive = vec![true; db.len()];
        Ok(PathDbGuidance { db, alive, r_filter, query: None, links: Vec::new(), fallback })
    }

    pub fn alive(&self) -> &[bool] {
        &self.alive
    }

    pub fn current_query(&self) -> Option<usize> {
        self.query
    }

    fn ensure_query(&mut self, cs: &CSpace, start: &Pose, goal: &Pose) {
        if self.query.is_none_or(|q| !self.alive[q]) {
            self.query = self.db.query(cs, start, goal, &self.alive);
            self.links.clear();
        }
    }

    /// Links each new node to the queried waypoint minimizing distance plus
    /// remaining length among those it can locally plan to.
    fn refresh(&mut self, cs: &CSpace, tree: &SearchTree) {
        let Some(q) = self.query else { return };
        let entry = &self.db.entries[q];
        for v in self.links.len()..tree.len() {
            let p = tree.pose(v);
            let mut cand: Vec<(f64, f64, usize)> = entry
                .points
                .iter()
                .enumerate()
                .map(|(k, w)| {
                    let d = cs.distance(p, w);
                    (d + entry.remaining[k], d, k)
                })
                .collect();
            cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
            let link = cand
                .iter()
                .find(|&&(_, _, k)| cs.local_plan(p, &entry.points[k]).is_valid())
                .map_or(NodeLink { waypoint: 0, offset: f64::INFINITY, h: f64::INFINITY }, |&(h, d, k)| NodeLink {
                    waypoint: k,
                    offset: d,
                    h,
                });
            self.links.push(link);
        }
    }

    /// Heuristic of every tree node against the current query.
    pub fn heuristic(&mut self, cs: &CSpace, tree: &SearchTree, start: &Pose, goal: &Pose) -> Vec<f64> {
        self.ensure_query(cs, start, goal);
        if self.query.is_none() {
            return vec![f64::INFINITY; tree.len()];
        }
        self.refresh(cs, tree);
        self.links.iter().map(|l| l.h).collect()
    }
}

impl GuidingSpace for PathDbGuidance {
    fn name(&self) -> String {
        "pathdb".into()
    }

    fn select(&mut self, ctx: &SelectContext<'_>, rng: &mut PlannerRng) -> Result<Selection> {
        self.ensure_query(ctx.cs, &ctx.task.start, &ctx.task.goal);
        let Some(q) = self.query else {
            return self.fallback.select(ctx, rng);
        };
        self.refresh(ctx.cs, ctx.tree);
        let mut best: Option<(usize, f64)> = None;
        for (v, l) in self.links.iter().enumerate() {
            if l.h.is_finite() && best.is_none_or(|(_, b)| l.h < b) {
                best = Some((v, l.h));
            }
        }
        let Some((node, _)) = best else {
            return self.fallback.select(ctx, rng);
        };
        let entry = &self.db.entries[q];
        let NodeLink { waypoint: w, offset, .. } = self.links[node];
        // Reach the linked waypoint first, then walk the path.
        let target = if offset > 1e-9 {
            entry.points[w]
        } else if w + 1 < entry.points.len() {
            entry.points[w + 1]
        } else {
            ctx.task.goal
        };
        let distribution = ctx.want_distribution.then(|| GuidanceDistribution::one_hot(ctx.tree.len(), node));
        Ok(Selection { node, distribution, target })
    }

    fn on_failure(&mut self, cs: &CSpace, _tree: &SearchTree, failure: &FailedExpansion) {
        let at = failure.invalid_pose;
        let mut filtered = 0;
        for (k, e) in self.db.entries.iter().enumerate() {
            if self.alive[k] && e.points.iter().any(|w| cs.distance(w, &at) <= self.r_filter) {
                self.alive[k] = false;
                filtered += 1;
            }
        }
        if filtered == 0 {
            // Following the current path failed; do not retry it forever.
            if let Some(q) = self.query {
                self.alive[q] = false;
            }
        }
    }
}
