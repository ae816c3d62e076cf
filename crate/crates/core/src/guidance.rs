//! The guiding-space contract and the baseline guidances.
//!
//! A guiding space looks at the current tree and picks the node to expand
//! next plus a target pose to expand toward. It may also report the full
//! selection distribution over tree nodes, which the evaluation harness
//! compares against the oracle target.

use rand::Rng;

use crate::cspace::{planner_rng, CSpace, PlannerRng, Task};
use crate::error::{GuideError, Result};
use crate::geometry::Pose;
use crate::par;
use crate::tree::{FailedExpansion, SearchTree};

/// Probability vector aligned with tree node indices.
#[derive(Debug, Clone, PartialEq)]
pub struct GuidanceDistribution {
    probs: Vec<f64>,
}

impl GuidanceDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(GuideError::EmptyDistribution);
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(GuideError::InvalidParameter("probabilities must be finite and >= 0".into()));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(GuideError::InvalidParameter(format!("probabilities sum to {s}, not 1")));
        }
        Ok(GuidanceDistribution { probs })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(w: Vec<f64>) -> Result<Self> {
        let s: f64 = w.iter().sum();
        if !(s > 0.0) {
            return Err(GuideError::EmptyDistribution);
        }
        GuidanceDistribution::new(w.into_iter().map(|x| x / s).collect())
    }

    pub fn uniform(n: usize) -> Self {
        GuidanceDistribution { probs: vec![1.0 / n as f64; n] }
    }

    pub fn one_hot(n: usize, i: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[i] = 1.0;
        GuidanceDistribution { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

pub struct SelectContext<'a> {
    pub cs: &'a CSpace,
    pub tree: &'a SearchTree,
    pub task: &'a Task,
    pub want_distribution: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub node: usize,
    pub distribution: Option<GuidanceDistribution>,
    pub target: Pose,
}

pub trait GuidingSpace {
    fn name(&self) -> String;

    fn select(&mut self, ctx: &SelectContext<'_>, rng: &mut PlannerRng) -> Result<Selection>;

    /// Pose to validate as the new child of `selected`.
    fn expand(&self, cs: &CSpace, selected: &Pose, target: &Pose) -> Pose {
        steer(cs, selected, target)
    }

    fn on_success(&mut self, _cs: &CSpace, _tree: &SearchTree, _node: usize) {}

    fn on_failure(&mut self, _cs: &CSpace, _tree: &SearchTree, _failure: &FailedExpansion) {}
}

/// Standard steer: at most one `step_size` from `selected` toward `target`.
pub fn steer(cs: &CSpace, selected: &Pose, target: &Pose) -> Pose {
    cs.steer(selected, target, cs.step_size())
}

/// Index of the smallest finite value; ties go to the lowest index.
pub fn argmin(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        if v.is_finite() && best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Nearest pose under the C-space metric; ties go to the lowest index.
pub fn nearest(cs: &CSpace, poses: &[Pose], q: &Pose) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, p) in poses.iter().enumerate() {
        let d = cs.distance(p, q);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Trivial guiding space: every node is equally good.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformGuidance;

impl GuidingSpace for UniformGuidance {
    fn name(&self) -> String {
        "uniform".into()
    }

    fn select(&mut self, ctx: &SelectContext<'_>, rng: &mut PlannerRng) -> Result<Selection> {
        let n = ctx.tree.len();
        let node = rng.random_range(0..n);
        let target = ctx.cs.sample_uniform(rng);
        Ok(Selection { node, distribution: ctx.want_distribution.then(|| GuidanceDistribution::uniform(n)), target })
    }
}

/// Greedy distance-to-goal guidance with ε-uniform exploration.
#[derive(Debug, Clone)]
pub struct GoalDistanceGuidance {
    pub epsilon_greedy: f64,
    dist: Vec<f64>,
    best: usize,
}

impl GoalDistanceGuidance {
    pub fn new(epsilon_greedy: f64) -> Self {
        GoalDistanceGuidance { epsilon_greedy, dist: Vec::new(), best: 0 }
    }

    fn refresh(&mut self, cs: &CSpace, tree: &SearchTree, goal: &Pose) {
        for v in self.dist.len()..tree.len() {
            let d = cs.distance(tree.pose(v), goal);
            if self.dist.is_empty() || d < self.dist[self.best] {
                self.best = v;
            }
            self.dist.push(d);
        }
    }

    /// Current greedy choice.
    pub fn argmin_node(&self) -> usize {
        self.best
    }
}

impl Default for GoalDistanceGuidance {
    fn default() -> Self {
        GoalDistanceGuidance::new(0.1)
    }
}

impl GuidingSpace for GoalDistanceGuidance {
    fn name(&self) -> String {
        "goal".into()
    }

    fn select(&mut self, ctx: &SelectContext<'_>, rng: &mut PlannerRng) -> Result<Selection> {
        self.refresh(ctx.cs, ctx.tree, &ctx.task.goal);
        let n = ctx.tree.len();
        let node = if rng.random::<f64>() < self.epsilon_greedy { rng.random_range(0..n) } else { self.best };
        let distribution = ctx.want_distribution.then(|| {
            let u = self.epsilon_greedy / n as f64;
            let mut probs = vec![u; n];
            probs[self.best] += 1.0 - self.epsilon_greedy;
            GuidanceDistribution { probs }
        });
        Ok(Selection { node, distribution, target: ctx.task.goal })
    }
}

/// Monte Carlo estimate of the Voronoi cell masses of `poses`: the fraction
/// of `n_mc` uniform C-space samples nearest to each pose.
pub fn voronoi_masses(cs: &CSpace, poses: &[Pose], n_mc: usize, rng: &mut PlannerRng) -> Vec<f64> {
    let samples: Vec<Pose> = (0..n_mc).map(|_| cs.sample_uniform(rng)).collect();
    let owners = par::map(&samples, |q| nearest(cs, poses, q));
    let mut counts = vec![0usize; poses.len()];
    for o in owners {
        counts[o] += 1;
    }
    counts.into_iter().map(|c| c as f64 / n_mc as f64).collect()
}

/// RRT's implicit guidance: nearest node to a uniform sample, which selects
/// nodes in proportion to their Voronoi cell volume.
#[derive(Debug, Clone)]
pub struct VoronoiGuidance {
    pub n_mc: usize,
    mc_rng: PlannerRng,
}

/// Stream id reserved for Monte Carlo distribution estimates.
const MC_STREAM: u64 = 0x4d43;

impl VoronoiGuidance {
    /// `mc_seed` keys the private generator used for explicit distribution
    /// estimates, so requesting them never perturbs the search stream.
    pub fn new(n_mc: usize, mc_seed: u64) -> Self {
        VoronoiGuidance { n_mc, mc_rng: planner_rng(mc_seed, MC_STREAM) }
    }
}

impl GuidingSpace for VoronoiGuidance {
    fn name(&self) -> String {
        "voronoi".into()
    }

    fn select(&mut self, ctx: &SelectContext<'_>, rng: &mut PlannerRng) -> Result<Selection> {
        let q = ctx.cs.sample_uniform(rng);
        let node = nearest(ctx.cs, ctx.tree.poses(), &q);
        let distribution = if ctx.want_distribution {
            let n = ctx.tree.len();
            let probs = if n == 1 {
                vec![1.0]
            } else {
                voronoi_masses(ctx.cs, ctx.tree.poses(), self.n_mc, &mut self.mc_rng)
            };
            Some(GuidanceDistribution { probs })
        } else {
            None
        };
        Ok(Selection { node, distribution, target: q })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cspace::CSpaceParams;
    use crate::geometry::{Aabb, RectRobot, Workspace};
    use approx::assert_relative_eq;

    fn empty() -> CSpace {
        CSpace::with_defaults(RectRobot::new(0.6, 0.25).unwrap(), Aabb::new(0.0, 0.0, 10.0, 10.0), vec![]).unwrap()
    }

    fn task() -> Task {
        Task { start: Pose::new(1.0, 1.0, 0.0), goal: Pose::new(9.0, 9.0, 0.0) }
    }

    fn tree_of(poses: &[Pose]) -> SearchTree {
        let mut t = SearchTree::new(poses[0]);
        for p in &poses[1..] {
            t.add_child(0, *p, 1.0).unwrap();
        }
        t
    }

    #[test]
    fn distribution_validation() {
        assert!(GuidanceDistribution::new(vec![]).is_err());
        assert!(GuidanceDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(GuidanceDistribution::new(vec![0.5, 0.5]).is_ok());
        assert_eq!(GuidanceDistribution::uniform(4).probs(), &[0.25; 4]);
    }

    #[test]
    fn uniform_select() {
        let cs = empty();
        let task = task();
        let t = tree_of(&[Pose::new(1.0, 1.0, 0.0)]);
        let ctx = SelectContext { cs: &cs, tree: &t, task: &task, want_distribution: true };
        let mut rng = planner_rng(3, 0);
        let s = UniformGuidance.select(&ctx, &mut rng).unwrap();
        assert_eq!(s.node, 0);
        assert_eq!(s.distribution.unwrap().probs(), &[1.0]);
    }

    #[test]
    fn goal_distance_argmin() {
        let cs = empty();
        let task = task();
        let t = tree_of(&[Pose::new(1.0, 1.0, 0.0), Pose::new(8.0, 9.0, 0.0), Pose::new(7.0, 9.0, 0.0)]);
        let ctx = SelectContext { cs: &cs, tree: &t, task: &task, want_distribution: true };
        let mut g = GoalDistanceGuidance::new(0.0);
        let mut rng = planner_rng(3, 0);
        let s = g.select(&ctx, &mut rng).unwrap();
        assert_eq!(s.node, 1);
        assert_eq!(s.target, task.goal);
        let mut g = GoalDistanceGuidance::new(0.1);
        let s = g.select(&ctx, &mut rng).unwrap();
        let d = s.distribution.unwrap();
        assert_relative_eq!(d.probs()[1], 0.9 + 0.1 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn voronoi_single_node() {
        let cs = empty();
        let task = task();
        let t = tree_of(&[Pose::new(1.0, 1.0, 0.0)]);
        let ctx = SelectContext { cs: &cs, tree: &t, task: &task, want_distribution: true };
        let mut g = VoronoiGuidance::new(4096, 0);
        let mut rng = planner_rng(3, 0);
        let s = g.select(&ctx, &mut rng).unwrap();
        assert_eq!(s.node, 0);
        assert_eq!(s.distribution.unwrap().probs(), &[1.0]);
    }

    #[test]
    fn voronoi_mirror_symmetric_pair() {
        let cs = empty();
        let poses = [Pose::new(3.0, 5.0, 0.4), Pose::new(7.0, 5.0, 0.4)];
        let mut rng = planner_rng(11, 0);
        let m = voronoi_masses(&cs, &poses, 100_000, &mut rng);
        assert!((m[0] - 0.5).abs() < 0.02, "{m:?}");
    }

    #[test]
    fn voronoi_interval_masses() {
        // Degenerate y extent and zero rotation weight reduce to [0, 1].
        let robot = RectRobot::new(0.01, 0.01).unwrap();
        let ws = Workspace::new(Aabb::new(0.0, 0.0, 1.0, 0.0), vec![]).unwrap();
        let params = CSpaceParams { theta_weight: 0.0, edge_resolution: 0.01, goal_horizon: 0.1, step_size: 0.05 };
        let cs = CSpace::new(robot, ws, params).unwrap();
        let poses = [Pose::new(0.0, 0.0, 0.0), Pose::new(0.5, 0.0, 0.0), Pose::new(1.0, 0.0, 0.0)];
        let mut rng = planner_rng(5, 0);
        let m = voronoi_masses(&cs, &poses, 100_000, &mut rng);
        for (got, want) in m.iter().zip([0.25, 0.5, 0.25]) {
            assert!((got - want).abs() < 0.02, "{m:?}");
        }
    }

    #[test]
    fn argmin_ties_lowest_index() {
        assert_eq!(argmin([3.0, 1.0, 1.0]), Some(1));
        assert_eq!(argmin([f64::INFINITY, f64::INFINITY]), None);
        assert_eq!(argmin([f64::INFINITY, 2.0]), Some(1));
    }
}
