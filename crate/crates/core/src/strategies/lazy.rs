//! Lazy roadmap guidance: a PRM whose vertices are collision-checked but
//! whose edges are not. Each tree node links to its nearest live roadmap
//! vertices and is ranked by the metric distance onto the roadmap plus the
//! lazy shortest-path length from there to the goal. Failed
//! expansions delete nearby vertices so the roadmap path reroutes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::cspace::{CSpace, PlannerRng, Task};
use crate::error::{GuideError, Result};
use crate::geometry::Pose;
use crate::guidance::{GuidanceDistribution, GuidingSpace, SelectContext, Selection, VoronoiGuidance};
use crate::tree::{FailedExpansion, SearchTree};

#[derive(Debug, Clone)]
pub struct LazyRoadmap {
    pub vertices: Vec<Pose>,
    /// Symmetric adjacency with metric edge lengths.
    pub adjacency: Vec<Vec<(usize, f64)>>,
    pub start_vertex: usize,
    pub goal_vertex: usize,
    pub alive: Vec<bool>,
}

/// Samples `n_vertices` valid vertices (plus start and goal) and joins each
/// to its `k_neighbors` nearest. Edges are never collision-checked.
pub fn lazy_build(cs: &CSpace, task: &Task, n_vertices: usize, k_neighbors: usize, rng: &mut PlannerRng) -> Result<LazyRoadmap> {
    if n_vertices < 2 {
        return Err(GuideError::InvalidParameter("lazy roadmap needs at least 2 vertices".into()));
    }
    let max_attempts = 100 * n_vertices;
    let mut vertices = vec![task.start, task.goal];
    let mut attempts = 0;
    while vertices.len() < n_vertices + 2 {
        if attempts >= max_attempts {
            return Err(GuideError::VertexSampling { wanted: n_vertices, attempts });
        }
        attempts += 1;
        let q = cs.sample_uniform(rng);
        if cs.is_valid(&q) {
            vertices.push(q);
        }
    }
    let n = vertices.len();
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        scratch.clear();
        scratch.extend((0..n).filter(|&j| j != i).map(|j| (cs.distance(&vertices[i], &vertices[j]), j)));
        let k = k_neighbors.min(scratch.len());
        if k == 0 {
            continue;
        }
        scratch.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(d, j) in &scratch[..k] {
            if !adjacency[i].iter().any(|&(x, _)| x == j) {
                adjacency[i].push((j, d));
                adjacency[j].push((i, d));
            }
        }
    }
    for adj in &mut adjacency {
        adj.sort_by_key(|&(j, _)| j);
    }
    Ok(LazyRoadmap { alive: vec![true; n], vertices, adjacency, start_vertex: 0, goal_vertex: 1 })
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl LazyRoadmap {
    pub fn alive_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    /// Shortest lazy distance to the goal vertex over live vertices, and the
    /// next hop toward it.
    pub fn distances_to_goal(&self) -> (Vec<f64>, Vec<Option<usize>>) {
        let n = self.vertices.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut next = vec![None; n];
        if !self.alive[self.goal_vertex] {
            return (dist, next);
        }
        let mut heap = BinaryHeap::new();
        dist[self.goal_vertex] = 0.0;
        heap.push(Entry(0.0, self.goal_vertex));
        while let Some(Entry(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                if !self.alive[v] {
                    continue;
                }
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    next[v] = Some(u);
                    heap.push(Entry(nd, v));
                }
            }
        }
        (dist, next)
    }

    /// Marks dead every live vertex within `radius` of `at`; returns how many.
    pub fn delete_near(&mut self, cs: &CSpace, at: &Pose, radius: f64) -> usize {
        let mut removed = 0;
        for (v, p) in self.vertices.iter().enumerate() {
            if self.alive[v] && cs.distance(p, at) <= radius {
                self.alive[v] = false;
                removed += 1;
            }
        }
        removed
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LazyParams {
    pub n_vertices: usize,
    pub k_neighbors: usize,
    /// Deletion radius around an invalid pose.
    pub r_del: f64,
}

impl LazyParams {
    pub fn defaults_for(cs: &CSpace) -> Self {
        LazyParams { n_vertices: 300, k_neighbors: 8, r_del: 2.0 * cs.step_size() }
    }
}

pub struct LazyGuidance {
    roadmap: LazyRoadmap,
    r_del: f64,
    /// Number of live vertices each tree node is linked to.
    k_link: usize,
    dist: Vec<f64>,
    next: Vec<Option<usize>>,
    /// Per tree node: its `k_link` nearest live vertices with metric distances.
    links: Vec<Vec<(usize, f64)>>,
    fallback: VoronoiGuidance,
    /// Roadmap vertex the last selection steered toward.
    last_target: Option<usize>,
}

impl LazyGuidance {
    pub fn new(roadmap: LazyRoadmap, k_link: usize, r_del: f64, fallback: VoronoiGuidance) -> Self {
        let (dist, next) = roadmap.distances_to_goal();
        LazyGuidance { roadmap, r_del, k_link: k_link.max(1), dist, next, links: Vec::new(), fallback, last_target: None }
    }

    /// Builds the roadmap from `rng` and wraps it.
    pub fn build(cs: &CSpace, task: &Task, params: LazyParams, rng: &mut PlannerRng, fallback: VoronoiGuidance) -> Result<Self> {
        let rm = lazy_build(cs, task, params.n_vertices, params.k_neighbors, rng)?;
        Ok(LazyGuidance::new(rm, params.k_neighbors, params.r_del, fallback))
    }

    pub fn roadmap(&self) -> &LazyRoadmap {
        &self.roadmap
    }

    /// Lazy shortest-path length from the start vertex.
    pub fn start_path_length(&self) -> f64 {
        self.dist[self.roadmap.start_vertex]
    }

    fn nearest_alive(&self, cs: &CSpace, p: &Pose) -> Vec<(usize, f64)> {
        let mut all: Vec<(usize, f64)> = self
            .roadmap
            .vertices
            .iter()
            .enumerate()
            .filter(|&(v, _)| self.roadmap.alive[v])
            .map(|(v, q)| (v, cs.distance(p, q)))
            .collect();
        let k = self.k_link.min(all.len());
        if k < all.len() {
            all.select_nth_unstable_by(k, |a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            all.truncate(k);
        }
        all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        all
    }

    fn refresh(&mut self, cs: &CSpace, tree: &SearchTree) {
        for v in 0..self.links.len() {
            if self.links[v].iter().any(|&(u, _)| !self.roadmap.alive[u]) {
                self.links[v] = self.nearest_alive(cs, tree.pose(v));
            }
        }
        for v in self.links.len()..tree.len() {
            let l = self.nearest_alive(cs, tree.pose(v));
            self.links.push(l);
        }
    }

    /// Best entry vertex for node `v` and its heuristic value.
    fn entry(&self, v: usize) -> Option<(usize, f64, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for &(u, d) in &self.links[v] {
            let h = d + self.dist[u];
            if h.is_finite() && best.is_none_or(|(_, _, b)| h < b) {
                best = Some((u, d, h));
            }
        }
        best
    }

    /// Heuristic of every tree node (refreshing caches first).
    pub fn heuristic(&mut self, cs: &CSpace, tree: &SearchTree) -> Vec<f64> {
        self.refresh(cs, tree);
        (0..self.links.len()).map(|v| self.entry(v).map_or(f64::INFINITY, |e| e.2)).collect()
    }
}

impl GuidingSpace for LazyGuidance {
    fn name(&self) -> String {
        "lazyprm".into()
    }

    fn select(&mut self, ctx: &SelectContext<'_>, rng: &mut PlannerRng) -> Result<Selection> {
        self.refresh(ctx.cs, ctx.tree);
        let mut best: Option<(usize, usize, f64, f64)> = None;
        for v in 0..self.links.len() {
            if let Some((u, d, h)) = self.entry(v) {
                if best.is_none_or(|b| h < b.3) {
                    best = Some((v, u, d, h));
                }
            }
        }
        let Some((node, u, d, _)) = best else {
            self.last_target = None;
            return self.fallback.select(ctx, rng);
        };
        // Head for the entry vertex first; once on it, follow the lazy path.
        let target_vertex = if d > 1e-9 { u } else { self.next[u].unwrap_or(self.roadmap.goal_vertex) };
        self.last_target = Some(target_vertex);
        let distribution = ctx.want_distribution.then(|| GuidanceDistribution::one_hot(ctx.tree.len(), node));
        Ok(Selection { node, distribution, target: self.roadmap.vertices[target_vertex] })
    }

    fn on_failure(&mut self, cs: &CSpace, _tree: &SearchTree, failure: &FailedExpansion) {
        let mut removed = self.roadmap.delete_near(cs, &failure.invalid_pose, self.r_del);
        if removed == 0 {
            // The vertex being steered toward is unreachable along this edge.
            if let Some(t) = self.last_target.filter(|&t| self.roadmap.alive[t]) {
                self.roadmap.alive[t] = false;
                removed = 1;
            }
        }
        if removed > 0 {
            let (dist, next) = self.roadmap.distances_to_goal();
            self.dist = dist;
            self.next = next;
        }
    }
}
