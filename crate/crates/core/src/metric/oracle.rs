//! Grid cost-to-go oracle over the discretized C-space.
//!
//! Cells are `(x, y, θ)` boxes; a cell is traversable iff the robot is
//! collision-free at its center. Costs come from a Dijkstra sweep out of the
//! goal cell over the 26-neighborhood (8 planar moves × three θ steps, θ
//! wrapping), with each move charged the C-space metric between centers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cspace::CSpace;
use crate::error::{GuideError, Result};
use crate::geometry::{wrap_angle, EnvironmentDesc, Pose, Vec2};
use crate::par::{self, ExecMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridShape {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
}

impl Default for GridShape {
    fn default() -> Self {
        GridShape { nx: 128, ny: 128, nt: 32 }
    }
}

impl GridShape {
    pub fn cells(&self) -> usize {
        self.nx * self.ny * self.nt
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.nx, self.ny, self.nt)
    }
}

impl FromStr for GridShape {
    type Err = GuideError;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('x').collect();
        let bad = || GuideError::InvalidParameter(format!("grid shape must look like 128x128x32, got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let v: Vec<usize> = parts.iter().map(|p| p.trim().parse::<usize>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        if v.contains(&0) {
            return Err(bad());
        }
        Ok(GridShape { nx: v[0], ny: v[1], nt: v[2] })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleField {
    pub shape: GridShape,
    pub origin: Vec2,
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
    pub theta_weight: f64,
    pub goal_cell: usize,
    /// Metric distance from the goal cell's center to the goal itself.
    pub goal_offset: f64,
    /// Row-major over `(x, y, θ)`, θ fastest.
    pub cost: Vec<f64>,
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

impl OracleField {
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.shape.ny + j) * self.shape.nt + k
    }

    pub fn unindex(&self, idx: usize) -> (usize, usize, usize) {
        let k = idx % self.shape.nt;
        let r = idx / self.shape.nt;
        (r / self.shape.ny, r % self.shape.ny, k)
    }

    pub fn center(&self, i: usize, j: usize, k: usize) -> Pose {
        Pose::new(
            self.origin.x + (i as f64 + 0.5) * self.dx,
            self.origin.y + (j as f64 + 0.5) * self.dy,
            -PI + (k as f64 + 0.5) * self.dtheta,
        )
    }

    /// Cell containing `p`; positions outside the grid clamp to the border.
    pub fn cell_of(&self, p: &Pose) -> (usize, usize, usize) {
        let clamp = |v: f64, n: usize| (v.floor().max(0.0) as usize).min(n - 1);
        let i = clamp((p.x - self.origin.x) / self.dx, self.shape.nx);
        let j = clamp((p.y - self.origin.y) / self.dy, self.shape.ny);
        let k = clamp((wrap_angle(p.theta) + PI) / self.dtheta, self.shape.nt);
        (i, j, k)
    }

    /// Largest single-move cost, used as the "one cell" discretization unit.
    pub fn cell_cost(&self) -> f64 {
        self.dx.hypot(self.dy) + self.theta_weight * self.dtheta
    }

    fn metric(&self, a: &Pose, b: &Pose) -> f64 {
        (b.x - a.x).hypot(b.y - a.y) + self.theta_weight * wrap_angle(b.theta - a.theta).abs()
    }

    fn neighbors(&self, i: usize, j: usize, k: usize) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let GridShape { nx, ny, nt } = self.shape;
        let dks: &[i64] = match nt {
            1 => &[0],
            2 => &[0, 1],
            _ => &[-1, 0, 1],
        };
        (-1i64..=1).flat_map(move |di| {
            (-1i64..=1).flat_map(move |dj| {
                dks.iter().filter_map(move |&dk| {
                    if di == 0 && dj == 0 && dk == 0 {
                        return None;
                    }
                    let ni = i as i64 + di;
                    let nj = j as i64 + dj;
                    if ni < 0 || nj < 0 || ni >= nx as i64 || nj >= ny as i64 {
                        return None;
                    }
                    let nk = (k as i64 + dk).rem_euclid(nt as i64) as usize;
                    Some((ni as usize, nj as usize, nk))
                })
            })
        })
    }

    /// Cost-to-go from `p`: the value of its cell plus the metric hops from
    /// `p` to the cell center and from the goal cell's center to the goal, so
    /// the result never undercuts the straight-line metric distance. If the
    /// cell is untraversable (its center collides though `p` may not), the
    /// cheapest traversable neighbor is used instead.
    pub fn query(&self, p: &Pose) -> f64 {
        let (i, j, k) = self.cell_of(p);
        let c = self.cost[self.index(i, j, k)];
        if c.is_finite() {
            return c + self.metric(p, &self.center(i, j, k)) + self.goal_offset;
        }
        self.goal_offset
            + self
                .neighbors(i, j, k)
            .map(|(a, b, d)| {
                let nc = self.cost[self.index(a, b, d)];
                if nc.is_finite() {
                    nc + self.metric(p, &self.center(a, b, d))
                } else {
                    f64::INFINITY
                }
            })
                .fold(f64::INFINITY, f64::min)
    }

    /// Cost of the cell containing `p`, without the neighbor fallback.
    pub fn cell_value(&self, p: &Pose) -> f64 {
        let (i, j, k) = self.cell_of(p);
        self.cost[self.index(i, j, k)]
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for n in [self.shape.nx, self.shape.ny, self.shape.nt] {
            w.write_all(&(n as u32).to_le_bytes())?;
        }
        for v in [self.origin.x, self.origin.y, self.dx, self.dy, self.dtheta, self.theta_weight, self.goal_offset] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&(self.goal_cell as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.cost.len() * 8);
        for c in &self.cost {
            buf.extend_from_slice(&c.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(GuideError::OracleFormat("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut u32s = [0u32; 4];
        for v in &mut u32s {
            r.read_exact(&mut b4)?;
            *v = u32::from_le_bytes(b4);
        }
        if u32s[0] != VERSION {
            return Err(GuideError::OracleFormat(format!("unsupported version {}", u32s[0])));
        }
        let shape = GridShape { nx: u32s[1] as usize, ny: u32s[2] as usize, nt: u32s[3] as usize };
        if shape.cells() == 0 {
            return Err(GuideError::OracleFormat("empty grid".into()));
        }
        let mut b8 = [0u8; 8];
        let mut f = [0f64; 7];
        for v in &mut f {
            r.read_exact(&mut b8)?;
            *v = f64::from_le_bytes(b8);
        }
        r.read_exact(&mut b8)?;
        let goal_cell = u64::from_le_bytes(b8) as usize;
        let mut raw = vec![0u8; shape.cells() * 8];
        r.read_exact(&mut raw)?;
        let cost = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        if goal_cell >= shape.cells() {
            return Err(GuideError::OracleFormat("goal cell out of range".into()));
        }
        Ok(OracleField {
            shape,
            origin: Vec2::new(f[0], f[1]),
            dx: f[2],
            dy: f[3],
            dtheta: f[4],
            theta_weight: f[5],
            goal_offset: f[6],
            goal_cell,
            cost,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("tmp");
        self.write_to(std::io::BufWriter::new(std::fs::File::create(&tmp)?))?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        OracleField::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

const MAGIC: &[u8; 8] = b"GKORACLE";
const VERSION: u32 = 2;

/// Builds the cost-to-go field toward `goal`.
pub fn oracle_build(cs: &CSpace, goal: &Pose, shape: GridShape) -> Result<OracleField> {
    oracle_build_with(ExecMode::Auto, cs, goal, shape)
}

pub fn oracle_build_with(mode: ExecMode, cs: &CSpace, goal: &Pose, shape: GridShape) -> Result<OracleField> {
    if shape.cells() == 0 {
        return Err(GuideError::InvalidParameter("grid shape must be non-empty".into()));
    }
    let b = cs.bounds();
    let mut field = OracleField {
        shape,
        origin: b.min,
        dx: b.width() / shape.nx as f64,
        dy: b.height() / shape.ny as f64,
        dtheta: 2.0 * PI / shape.nt as f64,
        theta_weight: cs.params().theta_weight,
        goal_cell: 0,
        goal_offset: 0.0,
        cost: vec![f64::INFINITY; shape.cells()],
    };
    let valid: Vec<bool> = {
        let f = &field;
        par::map_range(mode, shape.cells(), |idx| {
            let (i, j, k) = f.unindex(idx);
            cs.is_valid(&f.center(i, j, k))
        })
    };
    let (gi, gj, gk) = field.cell_of(goal);
    let g = field.index(gi, gj, gk);
    if !valid[g] {
        return Err(GuideError::InvalidGoalCell);
    }
    field.goal_cell = g;
    field.goal_offset = field.metric(&field.center(gi, gj, gk), goal);

    // Move costs depend only on the offset.
    let step = |di: i64, dj: i64, dk: i64| {
        (di as f64 * field.dx).hypot(dj as f64 * field.dy) + field.theta_weight * (dk as f64 * field.dtheta).abs()
    };
    let mut dist = vec![f64::INFINITY; shape.cells()];
    let mut heap = BinaryHeap::new();
    dist[g] = 0.0;
    heap.push(Entry(0.0, g));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        let (i, j, k) = field.unindex(u);
        for (ni, nj, nk) in field.neighbors(i, j, k) {
            let v = field.index(ni, nj, nk);
            if !valid[v] {
                continue;
            }
            let dk = if nk == k {
                0
            } else {
                1
            };
            let nd = d + step(ni as i64 - i as i64, nj as i64 - j as i64, dk);
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Entry(nd, v));
            }
        }
    }
    field.cost = dist;
    Ok(field)
}

/// Stable cache key for an (environment, goal, grid) triple.
pub fn cache_key(desc: &EnvironmentDesc, goal: &Pose, shape: GridShape) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(desc)?);
    for v in goal.to_array() {
        h.update(v.to_le_bytes());
    }
    h.update(shape.to_string().as_bytes());
    Ok(hex::encode(h.finalize()))
}

/// `$GUIDEKIT_CACHE`, or `guidekit-cache` under the system temp directory.
pub fn cache_dir() -> PathBuf {
    std::env::var_os("GUIDEKIT_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("guidekit-cache"))
}

/// Loads the field from the cache directory or builds and stores it.
pub fn load_or_build(cs: &CSpace, desc: &EnvironmentDesc, goal: &Pose, shape: GridShape) -> Result<OracleField> {
    let path = cache_dir().join(format!("{}.oracle", cache_key(desc, goal, shape)?));
    if let Ok(f) = OracleField::load(&path) {
        if f.shape == shape {
            return Ok(f);
        }
    }
    let f = oracle_build(cs, goal, shape)?;
    // A read-only cache directory only costs a rebuild next time.
    let _ = f.save(&path);
    Ok(f)
}
