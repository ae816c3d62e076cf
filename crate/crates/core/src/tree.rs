//! Search tree and the guided-search loop.
//!
//! Each iteration asks the guiding space for a node and an expansion target,
//! validates the resulting edge with the local planner, and reports the
//! outcome back to the guiding space. Nodes are never removed, so the tree as
//! seen at iteration `i` is the prefix of the final tree of length
//! [`IterationRecord::tree_size`].

use std::io::Write;

use crate::cspace::{CSpace, LocalPlan, PlannerRng, Task};
use crate::error::{GuideError, Result};
use crate::geometry::Pose;
use crate::guidance::{GuidanceDistribution, GuidingSpace, SelectContext, Selection};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailedExpansion {
    pub node: usize,
    pub attempted: Pose,
    /// Interpolation fraction of the first invalid pose along the edge.
    pub invalid_at: f64,
    /// First invalid interpolated pose; the only point known to lie in C_obs.
    pub invalid_pose: Pose,
}

#[derive(Debug, Clone, Default)]
pub struct SearchTree {
    poses: Vec<Pose>,
    parent: Vec<Option<usize>>,
    edge_cost: Vec<f64>,
    cost_from_root: Vec<f64>,
    depth: Vec<usize>,
    failed: Vec<FailedExpansion>,
}

impl SearchTree {
    pub fn new(root: Pose) -> Self {
        SearchTree {
            poses: vec![root],
            parent: vec![None],
            edge_cost: vec![0.0],
            cost_from_root: vec![0.0],
            depth: vec![0],
            failed: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn pose(&self, v: usize) -> &Pose {
        &self.poses[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn edge_cost(&self, v: usize) -> f64 {
        self.edge_cost[v]
    }

    pub fn cost_from_root(&self, v: usize) -> f64 {
        self.cost_from_root[v]
    }

    pub fn failed_expansions(&self) -> &[FailedExpansion] {
        &self.failed
    }

    fn check(&self, v: usize) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(GuideError::IndexOutOfRange { index: v, size: self.len() })
        }
    }

    pub fn add_child(&mut self, parent: usize, pose: Pose, cost: f64) -> Result<usize> {
        self.check(parent)?;
        self.poses.push(pose);
        self.parent.push(Some(parent));
        self.edge_cost.push(cost);
        self.cost_from_root.push(self.cost_from_root[parent] + cost);
        self.depth.push(self.depth[parent] + 1);
        Ok(self.poses.len() - 1)
    }

    pub fn record_failure(&mut self, failure: FailedExpansion) {
        self.failed.push(failure);
    }

    /// Root-to-`leaf` pose sequence.
    pub fn extract_path(&self, leaf: usize) -> Result<Vec<Pose>> {
        self.check(leaf)?;
        let mut out = vec![self.poses[leaf]];
        let mut v = leaf;
        while let Some(p) = self.parent[v] {
            out.push(self.poses[p]);
            v = p;
        }
        out.reverse();
        Ok(out)
    }

    /// Length of the tree path between `u` and `v` (through their lowest
    /// common ancestor).
    pub fn tree_distance(&self, u: usize, v: usize) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        let (mut a, mut b) = (u, v);
        let mut total = 0.0;
        while self.depth[a] > self.depth[b] {
            total += self.edge_cost[a];
            a = self.parent[a].expect("non-root has parent");
        }
        while self.depth[b] > self.depth[a] {
            total += self.edge_cost[b];
            b = self.parent[b].expect("non-root has parent");
        }
        while a != b {
            total += self.edge_cost[a] + self.edge_cost[b];
            a = self.parent[a].expect("non-root has parent");
            b = self.parent[b].expect("non-root has parent");
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration counter.
    pub iteration: usize,
    pub selected_node: usize,
    /// Tree size at selection time.
    pub tree_size: usize,
    /// Probability the guidance assigned to the selected node, when known.
    pub selected_probability: Option<f64>,
    pub selection_distribution: Option<GuidanceDistribution>,
    pub attempted: Pose,
    pub expansion_valid: bool,
    pub new_node: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SearchOptions {
    /// Ask the guidance for its full selection distribution every iteration.
    pub want_distribution: bool,
    /// Keep those distributions in the returned records.
    pub keep_distributions: bool,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub tree: SearchTree,
    pub goal_node: Option<usize>,
    pub path: Option<Vec<Pose>>,
    pub records: Vec<IterationRecord>,
}

impl SearchOutcome {
    pub fn solved(&self) -> bool {
        self.goal_node.is_some()
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }
}

/// Runs guided search without an observer.
pub fn guided_search(
    cs: &CSpace,
    task: &Task,
    guidance: &mut dyn GuidingSpace,
    budget: usize,
    rng: &mut PlannerRng,
    opts: SearchOptions,
) -> Result<SearchOutcome> {
    guided_search_observed(cs, task, guidance, budget, rng, opts, |_, _, _| Ok(()))
}

/// Runs guided search, calling `observe(tree, iteration, selection)` right
/// after every selection and before the tree changes.
pub fn guided_search_observed<F>(
    cs: &CSpace,
    task: &Task,
    guidance: &mut dyn GuidingSpace,
    budget: usize,
    rng: &mut PlannerRng,
    opts: SearchOptions,
    mut observe: F,
) -> Result<SearchOutcome>
where
    F: FnMut(&SearchTree, usize, &Selection) -> Result<()>,
{
    if budget == 0 {
        return Err(GuideError::InvalidParameter("search budget must be >= 1".into()));
    }
    cs.check_task(task)?;
    let mut tree = SearchTree::new(task.start);
    let mut records = Vec::new();

    if cs.goal_reached(&task.start, &task.goal) {
        let sel = Selection {
            node: 0,
            distribution: Some(GuidanceDistribution::uniform(1)),
            target: task.goal,
        };
        observe(&tree, 1, &sel)?;
        let g = tree.add_child(0, task.goal, cs.distance(&task.start, &task.goal))?;
        records.push(IterationRecord {
            iteration: 1,
            selected_node: 0,
            tree_size: 1,
            selected_probability: Some(1.0),
            selection_distribution: opts.keep_distributions.then(|| GuidanceDistribution::uniform(1)),
            attempted: task.goal,
            expansion_valid: true,
            new_node: Some(g),
        });
        let path = tree.extract_path(g)?;
        return Ok(SearchOutcome { tree, goal_node: Some(g), path: Some(path), records });
    }

    for iteration in 1..=budget {
        let ctx = SelectContext { cs, tree: &tree, task, want_distribution: opts.want_distribution };
        let sel = guidance.select(&ctx, rng)?;
        if sel.node >= tree.len() {
            return Err(GuideError::IndexOutOfRange { index: sel.node, size: tree.len() });
        }
        if let Some(d) = &sel.distribution {
            if d.is_empty() || d.len() != tree.len() {
                return Err(GuideError::EmptyDistribution);
            }
        }
        observe(&tree, iteration, &sel)?;

        let from = *tree.pose(sel.node);
        let mut x_new = guidance.expand(cs, &from, &sel.target);
        if cs.distance(&from, &x_new) <= 1e-12 {
            // Zero-length expansion: re-aim at a uniform sample.
            let q = cs.sample_uniform(rng);
            x_new = cs.steer(&from, &q, cs.step_size());
        }
        let tree_size = tree.len();
        let selected_probability = sel.distribution.as_ref().map(|d| d.probs()[sel.node]);
        let selection_distribution = if opts.keep_distributions { sel.distribution } else { None };

        match cs.local_plan(&from, &x_new) {
            LocalPlan::Valid => {
                let v = tree.add_child(sel.node, x_new, cs.distance(&from, &x_new))?;
                records.push(IterationRecord {
                    iteration,
                    selected_node: sel.node,
                    tree_size,
                    selected_probability,
                    selection_distribution,
                    attempted: x_new,
                    expansion_valid: true,
                    new_node: Some(v),
                });
                guidance.on_success(cs, &tree, v);
                if cs.goal_reached(&x_new, &task.goal) {
                    let g = if x_new == task.goal {
                        v
                    } else {
                        tree.add_child(v, task.goal, cs.distance(&x_new, &task.goal))?
                    };
                    let path = tree.extract_path(g)?;
                    return Ok(SearchOutcome { tree, goal_node: Some(g), path: Some(path), records });
                }
            }
            LocalPlan::Invalid { at, pose } => {
                let failure = FailedExpansion { node: sel.node, attempted: x_new, invalid_at: at, invalid_pose: pose };
                tree.record_failure(failure);
                records.push(IterationRecord {
                    iteration,
                    selected_node: sel.node,
                    tree_size,
                    selected_probability,
                    selection_distribution,
                    attempted: x_new,
                    expansion_valid: false,
                    new_node: None,
                });
                guidance.on_failure(cs, &tree, &failure);
            }
        }
    }
    Ok(SearchOutcome { tree, goal_node: None, path: None, records })
}

/// Writes one CSV row per iteration.
pub fn write_trace<W: Write>(out: W, outcome: &SearchOutcome) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "selected_node", "valid", "new_node", "x", "y", "theta", "selected_prob"])?;
    for r in &outcome.records {
        let (x, y, th) = (r.attempted.x, r.attempted.y, r.attempted.theta);
        w.write_record([
            r.iteration.to_string(),
            r.selected_node.to_string(),
            (r.expansion_valid as u8).to_string(),
            r.new_node.map(|v| v.to_string()).unwrap_or_default(),
            format!("{x:.17e}"),
            format!("{y:.17e}"),
            format!("{th:.17e}"),
            r.selected_probability.map(|p| format!("{p:.17e}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
