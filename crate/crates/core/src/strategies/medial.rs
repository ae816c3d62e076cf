//! Medial-axis guidance: tree nodes are projected onto the workspace
//! skeleton and ranked by weighted skeleton distance to the goal's
//! projection. Failures make the offending skeleton edge more expensive.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use crate::cspace::{CSpace, PlannerRng};
use crate::error::Result;
use crate::geometry::{rasterize, Pose, Vec2};
use crate::guidance::{GuidanceDistribution, GuidingSpace, SelectContext, Selection, VoronoiGuidance};
use crate::strategies::skeleton::{skeleton_extract, SkeletonGraph, SkeletonPoint};
use crate::tree::{FailedExpansion, SearchTree};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedialParams {
    /// Skeleton grid cell size.
    pub cell_size: f64,
    /// Edges with smaller obstacle clearance are pruned.
    pub min_clearance: f64,
    pub w_penalty: f64,
}

impl MedialParams {
    pub fn defaults_for(cs: &CSpace) -> Self {
        MedialParams {
            cell_size: 0.005 * cs.bounds().diagonal(),
            min_clearance: 0.4 * cs.robot().half_width,
            w_penalty: 2.0,
        }
    }
}

/// Builds the skeleton of `cs`'s workspace.
pub fn build_skeleton(cs: &CSpace, params: &MedialParams) -> Result<SkeletonGraph> {
    let grid = rasterize(cs.workspace(), params.cell_size)?;
    skeleton_extract(&grid, params.min_clearance)
}

/// Where to go after arriving at a skeleton node on the way to the goal.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Hop {
    /// Follow `edge` to its other end `to`.
    Via { edge: usize, to: usize },
    /// Enter the goal edge and stop at the goal projection.
    Goal,
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

/// Continuation when moving along one edge.
#[derive(Debug, Clone, Copy)]
enum Leg {
    ToNode(usize),
    Stop,
}

pub struct MedialAxisGuidance {
    graph: Arc<SkeletonGraph>,
    weights: Vec<f64>,
    w_penalty: f64,
    goal: SkeletonPoint,
    dist: Vec<f64>,
    hop: Vec<Option<Hop>>,
    proj: Vec<SkeletonPoint>,
    fallback: VoronoiGuidance,
}

impl MedialAxisGuidance {
    pub fn new(graph: Arc<SkeletonGraph>, goal: &Pose, w_penalty: f64, fallback: VoronoiGuidance) -> Result<Self> {
        let goal = graph.project(goal.position())?;
        let weights = vec![1.0; graph.edges.len()];
        let mut g = MedialAxisGuidance {
            graph,
            weights,
            w_penalty,
            goal,
            dist: Vec::new(),
            hop: Vec::new(),
            proj: Vec::new(),
            fallback,
        };
        g.recompute();
        Ok(g)
    }

    pub fn graph(&self) -> &SkeletonGraph {
        &self.graph
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn goal_projection(&self) -> SkeletonPoint {
        self.goal
    }

    fn recompute(&mut self) {
        let n = self.graph.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut hop = vec![None; n];
        let mut heap = BinaryHeap::new();
        let ge = &self.graph.edges[self.goal.edge];
        let wg = self.weights[self.goal.edge];
        for (node, d) in [(ge.a, wg * self.goal.s), (ge.b, wg * (ge.length() - self.goal.s))] {
            if d < dist[node] {
                dist[node] = d;
                hop[node] = Some(Hop::Goal);
                heap.push(Entry(d, node));
            }
        }
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (e, edge) in self.graph.edges.iter().enumerate() {
            if edge.a != edge.b {
                incident[edge.a].push(e);
                incident[edge.b].push(e);
            }
        }
        while let Some(Entry(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &e in &incident[u] {
                let edge = &self.graph.edges[e];
                let v = if edge.a == u { edge.b } else { edge.a };
                let nd = d + self.weights[e] * edge.length();
                if nd < dist[v] {
                    dist[v] = nd;
                    hop[v] = Some(Hop::Via { edge: e, to: u });
                    heap.push(Entry(nd, v));
                }
            }
        }
        self.dist = dist;
        self.hop = hop;
    }

    fn refresh(&mut self, tree: &SearchTree) -> Result<()> {
        for v in self.proj.len()..tree.len() {
            let p = self.graph.project(tree.pose(v).position())?;
            self.proj.push(p);
        }
        Ok(())
    }

    /// First move from `at`: the edge end to head for, its cost, and the arc
    /// length to travel on the current edge.
    fn first_leg(&self, at: &SkeletonPoint) -> (f64, f64, Leg) {
        let edge = &self.graph.edges[at.edge];
        let w = self.weights[at.edge];
        let mut best = (w * at.s + self.dist[edge.a], 0.0, Leg::ToNode(edge.a));
        let to_b = w * (edge.length() - at.s) + self.dist[edge.b];
        if to_b < best.0 {
            best = (to_b, edge.length(), Leg::ToNode(edge.b));
        }
        if at.edge == self.goal.edge {
            let direct = w * (at.s - self.goal.s).abs();
            if direct <= best.0 {
                best = (direct, self.goal.s, Leg::Stop);
            }
        }
        best
    }

    /// Weighted skeleton distance from a projected point to the goal projection.
    pub fn h_at(&self, at: &SkeletonPoint) -> f64 {
        self.first_leg(at).0
    }

    /// Heuristic of every tree node.
    pub fn heuristic(&mut self, tree: &SearchTree) -> Result<Vec<f64>> {
        self.refresh(tree)?;
        Ok(self.proj.iter().map(|p| self.h_at(p)).collect())
    }

    /// Walks `budget` arc length along the route from `at`. Returns the end
    /// point and the first edge with positive traversed length.
    fn walk(&self, at: &SkeletonPoint, budget: f64) -> (Vec2, Option<usize>) {
        let (_, mut target_s, mut leg) = self.first_leg(at);
        let (mut e, mut s) = (at.edge, at.s);
        let mut left = budget;
        let mut first = None;
        for _ in 0..=self.graph.edges.len() + 1 {
            let gap = (target_s - s).abs();
            let m = gap.min(left);
            if m > 0.0 && first.is_none() {
                first = Some(e);
            }
            s += m * (target_s - s).signum();
            left -= m;
            if left <= 0.0 {
                break;
            }
            let Leg::ToNode(n) = leg else { break };
            let edge_end = |edge: usize, node: usize| {
                let ed = &self.graph.edges[edge];
                if ed.a == node {
                    0.0
                } else {
                    ed.length()
                }
            };
            match self.hop[n] {
                Some(Hop::Goal) => {
                    e = self.goal.edge;
                    s = edge_end(e, n);
                    target_s = self.goal.s;
                    leg = Leg::Stop;
                }
                Some(Hop::Via { edge, to }) => {
                    s = edge_end(edge, n);
                    e = edge;
                    target_s = edge_end(edge, to);
                    leg = Leg::ToNode(to);
                }
                None => break,
            }
        }
        (self.graph.edges[e].point_at(s), first)
    }
}

/// Builds the skeleton and the guidance in one go.
pub fn medial_guidance(cs: &CSpace, goal: &Pose, params: &MedialParams, fallback: VoronoiGuidance) -> Result<MedialAxisGuidance> {
    let graph = build_skeleton(cs, params)?;
    MedialAxisGuidance::new(Arc::new(graph), goal, params.w_penalty, fallback)
}

impl GuidingSpace for MedialAxisGuidance {
    fn name(&self) -> String {
        "medialaxis".into()
    }

    fn select(&mut self, ctx: &SelectContext<'_>, rng: &mut PlannerRng) -> Result<Selection> {
        self.refresh(ctx.tree)?;
        let mut best: Option<(usize, f64)> = None;
        for (v, p) in self.proj.iter().enumerate() {
            let h = self.h_at(p);
            if h.is_finite() && best.is_none_or(|(_, b)| h < b) {
                best = Some((v, h));
            }
        }
        let Some((node, _)) = best else {
            return self.fallback.select(ctx, rng);
        };
        let from = ctx.tree.pose(node);
        let (p, _) = self.walk(&self.proj[node], ctx.cs.step_size());
        let distribution = ctx.want_distribution.then(|| GuidanceDistribution::one_hot(ctx.tree.len(), node));
        Ok(Selection { node, distribution, target: Pose::new(p.x, p.y, from.theta) })
    }

    fn on_failure(&mut self, cs: &CSpace, tree: &SearchTree, failure: &FailedExpansion) {
        if self.refresh(tree).is_err() {
            return;
        }
        let at = self.proj[failure.node];
        // A node sitting on an edge end does not travel its own edge, so the
        // penalty goes to the first edge it actually moves along.
        let edge = self.walk(&at, cs.step_size()).1.unwrap_or(at.edge);
        self.weights[edge] *= self.w_penalty;
        self.recompute();
    }
}

impl std::fmt::Debug for MedialAxisGuidance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MedialAxisGuidance")
            .field("edges", &self.graph.edges.len())
            .field("w_penalty", &self.w_penalty)
            .finish()
    }
}
