//! Named environments and the randomized two-room family.

use rand::Rng;

use crate::cspace::planner_rng;
use crate::error::{GuideError, Result};
use crate::geometry::{EnvironmentDesc, RobotDesc};

const SIMPLE_PASSAGE: &str = include_str!("../../envs/simple_passage.json");
const CUP: &str = include_str!("../../envs/cup.json");
const TRAP: &str = include_str!("../../envs/trap.json");
const TRAP_CUP: &str = include_str!("../../envs/trap_cup.json");

/// Canonical names accepted by [`environment`].
pub const ENV_NAMES: [&str; 7] =
    ["empty", "simple_passage", "cup", "trap", "trap_cup", "random_simple_passage[:seed]", "<file>.json"];

pub const WALL_X: (f64, f64) = (4.75, 5.25);
/// Gap width of the two-room family: 1.5 robot widths.
pub const GAP_WIDTH: f64 = 0.75;

fn parse(json: &str) -> EnvironmentDesc {
    serde_json::from_str(json).expect("shipped environment JSON is valid")
}

fn normalize(name: &str) -> String {
    name.chars().filter(|c| *c != '_' && *c != '-').flat_map(char::to_lowercase).collect()
}

pub fn empty() -> EnvironmentDesc {
    EnvironmentDesc {
        bounds: [0.0, 0.0, 10.0, 10.0],
        robot: RobotDesc { half_length: 0.6, half_width: 0.25 },
        obstacles: Vec::new(),
        start: [2.0, 5.0, 0.0],
        goal: [8.0, 5.0, 0.0],
        theta_weight: None,
        edge_resolution: None,
        goal_horizon: None,
    }
}

pub fn simple_passage() -> EnvironmentDesc {
    parse(SIMPLE_PASSAGE)
}

pub fn cup() -> EnvironmentDesc {
    parse(CUP)
}

pub fn trap() -> EnvironmentDesc {
    parse(TRAP)
}

pub fn trap_cup() -> EnvironmentDesc {
    parse(TRAP_CUP)
}

/// Gap center of the two-room instance for `seed`: uniform over the middle
/// 80% of the wall.
pub fn random_gap_center(seed: u64) -> f64 {
    let mut rng = planner_rng(seed, 0x5250);
    1.0 + 8.0 * rng.random::<f64>()
}

/// Two rooms split by a vertical wall with a narrow gap at `gap_center`.
pub fn two_rooms(gap_center: f64) -> EnvironmentDesc {
    let (x0, x1) = WALL_X;
    let (lo, hi) = (gap_center - GAP_WIDTH / 2.0, gap_center + GAP_WIDTH / 2.0);
    EnvironmentDesc {
        obstacles: vec![
            vec![[x0, 0.0], [x1, 0.0], [x1, lo], [x0, lo]],
            vec![[x0, hi], [x1, hi], [x1, 10.0], [x0, 10.0]],
        ],
        ..empty()
    }
}

pub fn random_simple_passage(seed: u64) -> EnvironmentDesc {
    two_rooms(random_gap_center(seed))
}

/// Looks an environment up by name. Case, `_` and `-` are ignored;
/// `random_simple_passage:<seed>` selects one instance of the family, and a
/// name ending in `.json` is read as an environment file.
pub fn environment(name: &str) -> Result<EnvironmentDesc> {
    if name.ends_with(".json") {
        return Ok(serde_json::from_str(&std::fs::read_to_string(name)?)?);
    }
    let (base, arg) = match name.split_once(':') {
        Some((b, a)) => (b, Some(a)),
        None => (name, None),
    };
    let unknown = || GuideError::UnknownName { kind: "environment", name: name.into(), valid: ENV_NAMES.join(", ") };
    match (normalize(base).as_str(), arg) {
        ("empty", None) => Ok(empty()),
        ("simplepassage", None) => Ok(simple_passage()),
        ("cup", None) => Ok(cup()),
        ("trap", None) => Ok(trap()),
        ("trapcup", None) => Ok(trap_cup()),
        ("randomsimplepassage", a) => {
            let seed = match a {
                Some(s) => s.parse().map_err(|_| unknown())?,
                None => 0,
            };
            Ok(random_simple_passage(seed))
        }
        _ => Err(unknown()),
    }
}

/// The shipped named environments.
pub fn catalog() -> Vec<(&'static str, EnvironmentDesc)> {
    vec![
        ("simple_passage", simple_passage()),
        ("cup", cup()),
        ("trap", trap()),
        ("trap_cup", trap_cup()),
        ("random_simple_passage", random_simple_passage(0)),
    ]
}
