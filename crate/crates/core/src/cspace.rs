//! The SE(2) configuration space of a rectangle robot.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GuideError, Result};
use crate::geometry::{wrap_angle, Aabb, EnvironmentDesc, Polygon, Pose, RectRobot, Workspace};

/// Per-search random stream.
pub type PlannerRng = ChaCha8Rng;

/// Stream `stream` of the generator keyed by `seed`. Distinct streams never overlap.
pub fn planner_rng(seed: u64, stream: u64) -> PlannerRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Tunable scalars of a configuration space. Defaults are derived from the
/// robot size and world extent, see [`CSpaceParams::defaults_for`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CSpaceParams {
    /// Length units charged per radian of rotation.
    pub theta_weight: f64,
    /// Maximum metric spacing between collision checks along an edge.
    pub edge_resolution: f64,
    /// Maximum metric distance for a direct connection to the goal.
    pub goal_horizon: f64,
    /// Default expansion step.
    pub step_size: f64,
}

impl CSpaceParams {
    pub fn defaults_for(robot: &RectRobot, bounds: &Aabb) -> Self {
        let diag = bounds.diagonal();
        CSpaceParams {
            theta_weight: 0.5 * robot.half_length,
            edge_resolution: 0.01 * diag,
            goal_horizon: 0.15 * diag,
            step_size: 0.05 * diag,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CSpace {
    robot: RectRobot,
    workspace: Workspace,
    params: CSpaceParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalPlan {
    Valid,
    /// `at` is the interpolation fraction of the first invalid checked pose.
    Invalid { at: f64, pose: Pose },
}

impl LocalPlan {
    pub fn is_valid(&self) -> bool {
        matches!(self, LocalPlan::Valid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub start: Pose,
    pub goal: Pose,
}

impl CSpace {
    pub fn new(robot: RectRobot, workspace: Workspace, params: CSpaceParams) -> Result<Self> {
        if !(params.edge_resolution > 0.0) {
            return Err(GuideError::InvalidParameter("edge_resolution must be > 0".into()));
        }
        if !(params.theta_weight >= 0.0) {
            return Err(GuideError::InvalidParameter("theta_weight must be >= 0".into()));
        }
        if !(params.step_size > 0.0) || !(params.goal_horizon >= 0.0) {
            return Err(GuideError::InvalidParameter("step_size must be > 0 and goal_horizon >= 0".into()));
        }
        Ok(CSpace { robot, workspace, params })
    }

    pub fn with_defaults(robot: RectRobot, bounds: Aabb, obstacles: Vec<Polygon>) -> Result<Self> {
        let params = CSpaceParams::defaults_for(&robot, &bounds);
        CSpace::new(robot, Workspace::new(bounds, obstacles)?, params)
    }

    /// Builds the space and task from an environment description; optional
    /// keys override the derived defaults.
    pub fn from_desc(desc: &EnvironmentDesc) -> Result<(Self, Task)> {
        let robot = desc.robot()?;
        let workspace = desc.workspace()?;
        let mut params = CSpaceParams::defaults_for(&robot, &workspace.bounds());
        if let Some(w) = desc.theta_weight {
            params.theta_weight = w;
        }
        if let Some(r) = desc.edge_resolution {
            params.edge_resolution = r;
        }
        if let Some(h) = desc.goal_horizon {
            params.goal_horizon = h;
        }
        let cs = CSpace::new(robot, workspace, params)?;
        let task = Task { start: Pose::from(desc.start), goal: Pose::from(desc.goal) };
        cs.check_task(&task)?;
        Ok((cs, task))
    }

    pub fn check_task(&self, task: &Task) -> Result<()> {
        if !self.is_valid(&task.start) {
            return Err(GuideError::InvalidTask(format!("start {:?} is in collision", task.start)));
        }
        if !self.is_valid(&task.goal) {
            return Err(GuideError::InvalidTask(format!("goal {:?} is in collision", task.goal)));
        }
        Ok(())
    }

    pub fn robot(&self) -> &RectRobot {
        &self.robot
    }

    pub fn workspace(&self) -> &Workspace {
        &self.workspace
    }

    pub fn bounds(&self) -> Aabb {
        self.workspace.bounds()
    }

    pub fn params(&self) -> &CSpaceParams {
        &self.params
    }

    pub fn step_size(&self) -> f64 {
        self.params.step_size
    }

    pub fn is_valid(&self, p: &Pose) -> bool {
        p.is_finite() && !self.workspace.robot_in_collision(&self.robot, p)
    }

    /// Euclidean translation plus weighted shortest-arc rotation.
    pub fn distance(&self, a: &Pose, b: &Pose) -> f64 {
        let dt = wrap_angle(b.theta - a.theta).abs();
        (b.x - a.x).hypot(b.y - a.y) + self.params.theta_weight * dt
    }

    /// Linear in position, shortest arc in orientation.
    pub fn interpolate(&self, a: &Pose, b: &Pose, t: f64) -> Pose {
        let dt = wrap_angle(b.theta - a.theta);
        Pose::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t, a.theta + dt * t)
    }

    /// Moves from `from` toward `to` by at most `step` under the metric.
    pub fn steer(&self, from: &Pose, to: &Pose, step: f64) -> Pose {
        let d = self.distance(from, to);
        if d <= step {
            *to
        } else {
            self.interpolate(from, to, step / d)
        }
    }

    /// Checks the straight segment `a → b` by dense interpolation.
    ///
    /// The checked poses are generated from a canonical ordering of the
    /// endpoints, so both directions test the same pose set.
    pub fn local_plan(&self, a: &Pose, b: &Pose) -> LocalPlan {
        let d = self.distance(a, b);
        let n = ((d / self.params.edge_resolution).ceil() as usize).max(1);
        let forward = (a.x, a.y, a.theta) <= (b.x, b.y, b.theta);
        let (lo, hi) = if forward { (a, b) } else { (b, a) };
        for step in 0..=n {
            let k = if forward { step } else { n - step };
            let p = if k == 0 {
                *lo
            } else if k == n {
                *hi
            } else {
                self.interpolate(lo, hi, k as f64 / n as f64)
            };
            if !self.is_valid(&p) {
                return LocalPlan::Invalid { at: step as f64 / n as f64, pose: p };
            }
        }
        LocalPlan::Valid
    }

    /// Uniform over bounds × [-π, π); validity is not checked.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Pose {
        let b = self.bounds();
        let x = b.min.x + b.width() * rng.random::<f64>();
        let y = b.min.y + b.height() * rng.random::<f64>();
        let theta = -PI + 2.0 * PI * rng.random::<f64>();
        Pose::new(x, y, theta)
    }

    /// Uniform rejection sample from the free space.
    pub fn sample_valid<R: Rng + ?Sized>(&self, rng: &mut R, max_attempts: usize) -> Option<Pose> {
        (0..max_attempts).map(|_| self.sample_uniform(rng)).find(|p| self.is_valid(p))
    }

    pub fn goal_reached(&self, p: &Pose, goal: &Pose) -> bool {
        self.distance(p, goal) <= self.params.goal_horizon && self.local_plan(p, goal).is_valid()
    }

    /// Sum of consecutive metric gaps.
    pub fn path_length(&self, path: &[Pose]) -> f64 {
        path.windows(2).map(|w| self.distance(&w[0], &w[1])).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn empty() -> CSpace {
        CSpace::with_defaults(RectRobot::new(0.6, 0.25).unwrap(), Aabb::new(0.0, 0.0, 10.0, 10.0), vec![]).unwrap()
    }

    fn walled() -> CSpace {
        let wall = Polygon::rect(4.75, 0.0, 5.25, 10.0).unwrap();
        CSpace::with_defaults(RectRobot::new(0.6, 0.25).unwrap(), Aabb::new(0.0, 0.0, 10.0, 10.0), vec![wall]).unwrap()
    }

    #[test]
    fn validity() {
        let cs = empty();
        assert!(cs.is_valid(&Pose::new(5.0, 5.0, 1.0)));
        assert!(!cs.is_valid(&Pose::new(11.0, 5.0, 0.0)));
        let cs = walled();
        // right edge of robot exactly on the wall face
        assert!(!cs.is_valid(&Pose::new(4.15, 5.0, 0.0)));
        assert!(cs.is_valid(&Pose::new(4.1499, 5.0, 0.0)));
    }

    #[test]
    fn distance_examples() {
        let cs = empty();
        let a = Pose::new(1.0, 2.0, 0.3);
        assert_eq!(cs.distance(&a, &a), 0.0);
        let b = Pose::new(1.0, 2.0, 0.3 + 2.0 * PI);
        assert!(cs.distance(&a, &b) < 1e-12);

        let mut params = *cs.params();
        params.theta_weight = 0.5;
        let cs2 = CSpace::new(*cs.robot(), cs.workspace().clone(), params).unwrap();
        let d = cs2.distance(&Pose::new(0.0, 0.0, 0.0), &Pose::new(3.0, 4.0, PI));
        assert_relative_eq!(d, 5.0 + 0.5 * PI, epsilon = 1e-12);
        assert_relative_eq!(d, 6.5708, epsilon = 1e-4);
    }

    #[test]
    fn local_plan_cases() {
        let cs = walled();
        let a = Pose::new(2.0, 5.0, 0.0);
        assert!(cs.local_plan(&a, &a).is_valid());
        match cs.local_plan(&a, &Pose::new(8.0, 5.0, 0.0)) {
            LocalPlan::Invalid { at, pose } => {
                assert!(at > 0.0 && at <= 1.0);
                assert!(!cs.is_valid(&pose));
            }
            LocalPlan::Valid => panic!("segment through the wall must fail"),
        }
    }

    #[test]
    fn local_plan_symmetric_at_half_turn() {
        let cs = walled();
        let a = Pose::new(2.0, 5.0, 0.0);
        let b = Pose::new(3.0, 5.0, -PI);
        assert_eq!(cs.local_plan(&a, &b).is_valid(), cs.local_plan(&b, &a).is_valid());
    }

    #[test]
    fn steer_respects_step() {
        let cs = empty();
        let a = Pose::new(1.0, 1.0, 0.0);
        let near = Pose::new(1.1, 1.0, 0.0);
        assert_eq!(cs.steer(&a, &near, cs.step_size()), near);
        let far = Pose::new(1.0 + 10.0 * cs.step_size(), 1.0, 0.0);
        let s = cs.steer(&a, &far, cs.step_size());
        assert_relative_eq!(s.x, 1.0 + cs.step_size(), epsilon = 1e-12);
        let mixed = Pose::new(4.0, 3.0, 2.5);
        let s = cs.steer(&a, &mixed, cs.step_size());
        assert_relative_eq!(cs.distance(&a, &s), cs.step_size(), epsilon = 1e-9);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let cs = empty();
        let mut r1 = planner_rng(7, 3);
        let mut r2 = planner_rng(7, 3);
        let a: Vec<Pose> = (0..20).map(|_| cs.sample_uniform(&mut r1)).collect();
        let b: Vec<Pose> = (0..20).map(|_| cs.sample_uniform(&mut r2)).collect();
        assert_eq!(a, b);
        let mut r3 = planner_rng(7, 4);
        assert_ne!(a[0], cs.sample_uniform(&mut r3));
    }

    #[test]
    fn goal_reached_cases() {
        let cs = walled();
        let g = Pose::new(7.0, 5.0, 0.0);
        assert!(cs.goal_reached(&g, &g));
        assert!(!cs.goal_reached(&Pose::new(3.5, 5.0, 0.0), &g));
        assert!(cs.goal_reached(&Pose::new(6.2, 4.5, 0.2), &g));
        // visible but beyond the horizon
        assert!(!cs.goal_reached(&Pose::new(9.4, 9.0, 0.0), &Pose::new(6.0, 1.0, 0.0)));
    }
}
