//! Combinator that hands control to the next member guidance every time an
//! expansion collides.

use crate::cspace::{CSpace, PlannerRng};
use crate::error::{GuideError, Result};
use crate::geometry::Pose;
use crate::guidance::{GuidingSpace, SelectContext, Selection};
use crate::tree::{FailedExpansion, SearchTree};

pub struct HybridGuidance {
    members: Vec<Box<dyn GuidingSpace>>,
    active: usize,
}

impl HybridGuidance {
    /// A single member is accepted and behaves exactly like that member.
    pub fn new(members: Vec<Box<dyn GuidingSpace>>) -> Result<Self> {
        if members.is_empty() {
            return Err(GuideError::InvalidParameter("hybrid guidance needs at least one member".into()));
        }
        Ok(HybridGuidance { members, active: 0 })
    }

    pub fn active(&self) -> usize {
        self.active
    }

    pub fn members(&self) -> &[Box<dyn GuidingSpace>] {
        &self.members
    }
}

impl GuidingSpace for HybridGuidance {
    fn name(&self) -> String {
        let names: Vec<String> = self.members.iter().map(|m| m.name()).collect();
        format!("hybrid:{}", names.join("+"))
    }

    fn select(&mut self, ctx: &SelectContext<'_>, rng: &mut PlannerRng) -> Result<Selection> {
        self.members[self.active].select(ctx, rng)
    }

    fn expand(&self, cs: &CSpace, selected: &Pose, target: &Pose) -> Pose {
        self.members[self.active].expand(cs, selected, target)
    }

    fn on_success(&mut self, cs: &CSpace, tree: &SearchTree, node: usize) {
        for m in &mut self.members {
            m.on_success(cs, tree, node);
        }
    }

    fn on_failure(&mut self, cs: &CSpace, tree: &SearchTree, failure: &FailedExpansion) {
        for m in &mut self.members {
            m.on_failure(cs, tree, failure);
        }
        self.active = (self.active + 1) % self.members.len();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cspace::{planner_rng, Task};
    use crate::geometry::{Aabb, RectRobot};
    use std::cell::RefCell;
    use std::rc::Rc;

    struct Probe {
        id: usize,
        log: Rc<RefCell<Vec<(usize, &'static str)>>>,
    }

    impl GuidingSpace for Probe {
        fn name(&self) -> String {
            format!("p{}", self.id)
        }

        fn select(&mut self, ctx: &SelectContext<'_>, _rng: &mut PlannerRng) -> Result<Selection> {
            self.log.borrow_mut().push((self.id, "select"));
            Ok(Selection { node: 0, distribution: None, target: ctx.task.goal })
        }

        fn on_failure(&mut self, _cs: &CSpace, _tree: &SearchTree, _f: &FailedExpansion) {
            self.log.borrow_mut().push((self.id, "fail"));
        }
    }

    #[test]
    fn rotates_on_failure_and_notifies_everyone() {
        let cs = CSpace::with_defaults(RectRobot::new(0.6, 0.25).unwrap(), Aabb::new(0.0, 0.0, 10.0, 10.0), vec![])
            .unwrap();
        let task = Task { start: Pose::new(1.0, 1.0, 0.0), goal: Pose::new(9.0, 9.0, 0.0) };
        let log = Rc::new(RefCell::new(Vec::new()));
        let members: Vec<Box<dyn GuidingSpace>> =
            (0..2).map(|id| Box::new(Probe { id, log: log.clone() }) as Box<dyn GuidingSpace>).collect();
        let mut h = HybridGuidance::new(members).unwrap();
        assert_eq!(h.name(), "hybrid:p0+p1");
        let tree = SearchTree::new(task.start);
        let ctx = SelectContext { cs: &cs, tree: &tree, task: &task, want_distribution: false };
        let mut rng = planner_rng(0, 0);
        let f = FailedExpansion { node: 0, attempted: task.goal, invalid_at: 0.5, invalid_pose: task.goal };
        let mut seq = vec![h.active()];
        for _ in 0..3 {
            h.select(&ctx, &mut rng).unwrap();
            h.on_failure(&cs, &tree, &f);
            seq.push(h.active());
        }
        assert_eq!(seq, vec![0, 1, 0, 1]);
        let fails = log.borrow().iter().filter(|e| e.1 == "fail").count();
        assert_eq!(fails, 6);
        assert!(HybridGuidance::new(Vec::new()).is_err());
    }
}
