//! Workspace medial axis of free space, extracted from an occupancy grid by
//! distance transform, ridge detection and homotopic thinning, then
//! compressed into a graph of polyline edges.

use crate::error::{GuideError, Result};
use crate::geometry::{OccupancyGrid, Vec2};

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonEdge {
    pub a: usize,
    pub b: usize,
    /// Polyline from node `a` to node `b`.
    pub points: Vec<Vec2>,
    /// Cumulative arc length at each point; `cum[0] == 0`.
    pub cum: Vec<f64>,
    /// Smallest obstacle clearance along the edge.
    pub min_clearance: f64,
}

impl SkeletonEdge {
    pub fn length(&self) -> f64 {
        *self.cum.last().unwrap_or(&0.0)
    }

    /// Point at arc length `s` (clamped to the edge).
    pub fn point_at(&self, s: f64) -> Vec2 {
        let s = s.clamp(0.0, self.length());
        let k = self.cum.partition_point(|&c| c <= s);
        if k >= self.points.len() {
            return *self.points.last().unwrap();
        }
        let (c0, c1) = (self.cum[k - 1], self.cum[k]);
        let t = if c1 > c0 { (s - c0) / (c1 - c0) } else { 0.0 };
        self.points[k - 1].lerp(self.points[k], t)
    }

    /// Closest point on the polyline: (arc length, distance).
    pub fn project(&self, p: Vec2) -> (f64, f64) {
        if self.points.len() == 1 {
            return (0.0, p.dist(self.points[0]));
        }
        let mut best = (0.0, f64::INFINITY);
        for k in 0..self.points.len() - 1 {
            let (u, v) = (self.points[k], self.points[k + 1]);
            let seg = v - u;
            let len2 = seg.dot(seg);
            let t = if len2 > 0.0 { ((p - u).dot(seg) / len2).clamp(0.0, 1.0) } else { 0.0 };
            let d = p.dist(u.lerp(v, t));
            if d < best.1 {
                best = (self.cum[k] + t * (self.cum[k + 1] - self.cum[k]), d);
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonGraph {
    pub nodes: Vec<Vec2>,
    pub edges: Vec<SkeletonEdge>,
}

/// Point on the skeleton given as an edge and an arc length along it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonPoint {
    pub edge: usize,
    pub s: f64,
    /// Workspace distance from the projected point.
    pub offset: f64,
}

impl SkeletonGraph {
    /// Nearest skeleton point to `p`; ties go to the lowest edge index.
    pub fn project(&self, p: Vec2) -> Result<SkeletonPoint> {
        let mut best: Option<SkeletonPoint> = None;
        for (e, edge) in self.edges.iter().enumerate() {
            let (s, d) = edge.project(p);
            if best.is_none_or(|b| d < b.offset) {
                best = Some(SkeletonPoint { edge: e, s, offset: d });
            }
        }
        best.ok_or(GuideError::EmptySkeleton)
    }

    pub fn point(&self, at: &SkeletonPoint) -> Vec2 {
        self.edges[at.edge].point_at(at.s)
    }

    /// All skeleton polyline points.
    pub fn points(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.edges.iter().flat_map(|e| e.points.iter().copied())
    }
}

/// Exact squared Euclidean distance transform of a 1D sampled function
/// (lower envelope of parabolas rooted at the finite samples).
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let mut k = 0usize;
    let mut any = false;
    for q in 0..f.len() {
        if !f[q].is_finite() {
            continue;
        }
        if !any {
            any = true;
            v[0] = q;
            z[0] = f64::NEG_INFINITY;
            z[1] = f64::INFINITY;
            continue;
        }
        let fq = f[q] + (q * q) as f64;
        let mut s;
        loop {
            let p = v[k];
            s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    if !any {
        out.fill(f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Distance (in world units) from each cell center to the nearest occupied
/// cell center, treating everything outside the grid as occupied.
pub fn clearance_field(grid: &OccupancyGrid) -> Vec<f64> {
    let (w, h) = (grid.width + 2, grid.height + 2);
    let mut f = vec![0.0; w * h];
    for j in 0..grid.height {
        for i in 0..grid.width {
            if !grid.is_occupied(i, j) {
                f[(j + 1) * w + i + 1] = f64::INFINITY;
            }
        }
    }
    let n = w.max(h);
    let (mut col, mut out, mut v, mut z) = (vec![0.0; n], vec![0.0; n], vec![0usize; n], vec![0.0; n + 1]);
    for i in 0..w {
        for j in 0..h {
            col[j] = f[j * w + i];
        }
        edt_1d(&col[..h], &mut out[..h], &mut v, &mut z);
        for j in 0..h {
            f[j * w + i] = out[j];
        }
    }
    for j in 0..h {
        edt_1d(&f[j * w..(j + 1) * w].to_vec(), &mut out[..w], &mut v, &mut z);
        f[j * w..(j + 1) * w].copy_from_slice(&out[..w]);
    }
    let mut d = vec![0.0; grid.width * grid.height];
    for j in 0..grid.height {
        for i in 0..grid.width {
            d[grid.index(i, j)] = f[(j + 1) * w + i + 1].sqrt() * grid.cell_size;
        }
    }
    d
}

// Counter-clockwise from east.
const N8: [(isize, isize); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

struct Raster {
    w: usize,
    h: usize,
    on: Vec<bool>,
}

impl Raster {
    fn get(&self, i: usize, j: usize, d: (isize, isize)) -> bool {
        let (x, y) = (i as isize + d.0, j as isize + d.1);
        x >= 0 && y >= 0 && (x as usize) < self.w && (y as usize) < self.h && self.on[y as usize * self.w + x as usize]
    }

    fn ring(&self, i: usize, j: usize) -> [bool; 8] {
        N8.map(|d| self.get(i, j, d))
    }

    fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = (idx % self.w, idx / self.w);
        N8.iter().filter(move |&&d| self.get(i, j, d)).map(move |&d| {
            ((j as isize + d.1) as usize) * self.w + (i as isize + d.0) as usize
        })
    }

    fn degree(&self, idx: usize) -> usize {
        self.neighbors(idx).count()
    }
}

/// Yokoi 8-connectivity number: 1 iff deleting the center keeps the local
/// foreground and background topology.
fn connectivity_8(ring: &[bool; 8]) -> i32 {
    let x = |k: usize| if ring[k % 8] { 0 } else { 1 };
    [0, 2, 4, 6].iter().map(|&k| x(k) - x(k) * x(k + 1) * x(k + 2)).sum()
}

fn is_simple(r: &Raster, idx: usize, keep_ends: bool) -> bool {
    let (i, j) = (idx % r.w, idx / r.w);
    let ring = r.ring(i, j);
    let count = ring.iter().filter(|&&b| b).count();
    if count == 0 || (keep_ends && count < 2) {
        return false;
    }
    connectivity_8(&ring) == 1
}

/// Ridge cells: strict local maxima of clearance across at least one of the
/// four grid directions.
fn ridge_anchors(grid: &OccupancyGrid, d: &[f64]) -> Vec<bool> {
    let (w, h) = (grid.width, grid.height);
    let at = |i: isize, j: isize| {
        if i < 0 || j < 0 || i as usize >= w || j as usize >= h {
            0.0
        } else {
            d[j as usize * w + i as usize]
        }
    };
    let mut anchor = vec![false; w * h];
    for j in 0..h {
        for i in 0..w {
            let c = d[j * w + i];
            if c <= 0.0 {
                continue;
            }
            let (x, y) = (i as isize, j as isize);
            anchor[j * w + i] = [(1, 0), (0, 1), (1, 1), (1, -1)].iter().any(|&(dx, dy)| {
                let (p, q) = (at(x + dx, y + dy), at(x - dx, y - dy));
                c >= p && c >= q && (c > p || c > q)
            });
        }
    }
    anchor
}

/// Zhang-Suen parallel thinning; reduces bands to one-cell lines while
/// keeping line ends.
fn zhang_suen(r: &mut Raster) {
    let mut marked = Vec::new();
    loop {
        let mut changed = false;
        for pass in 0..2 {
            marked.clear();
            for idx in 0..r.on.len() {
                if !r.on[idx] {
                    continue;
                }
                let ring = r.ring(idx % r.w, idx / r.w);
                // P2..P9 clockwise from north.
                let p = [ring[2], ring[1], ring[0], ring[7], ring[6], ring[5], ring[4], ring[3]];
                let b = p.iter().filter(|&&x| x).count();
                let a = (0..8).filter(|&k| !p[k] && p[(k + 1) % 8]).count();
                let (n, e, s, w) = (p[0], p[2], p[4], p[6]);
                let dir = if pass == 0 { !(n && e && s) && !(e && s && w) } else { !(n && e && w) && !(n && s && w) };
                if (2..=6).contains(&b) && a == 1 && dir {
                    marked.push(idx);
                }
            }
            for &idx in &marked {
                r.on[idx] = false;
            }
            changed |= !marked.is_empty();
        }
        if !changed {
            break;
        }
    }
}

fn thin(r: &mut Raster, order: &[usize], anchor: &[bool], keep_ends: bool) {
    loop {
        let mut changed = false;
        for &idx in order {
            if r.on[idx] && (keep_ends || !anchor[idx]) && is_simple(r, idx, keep_ends) {
                r.on[idx] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Extracts the skeleton of free space in `grid`; edges whose clearance
/// drops below `min_clearance` are dropped.
pub fn skeleton_extract(grid: &OccupancyGrid, min_clearance: f64) -> Result<SkeletonGraph> {
    if grid.occupied.iter().all(|&o| o) {
        return Err(GuideError::NoFreeCells);
    }
    let d = clearance_field(grid);
    let anchor = ridge_anchors(grid, &d);
    let mut r = Raster { w: grid.width, h: grid.height, on: grid.occupied.iter().map(|&o| !o).collect() };
    let mut order: Vec<usize> = (0..r.on.len()).filter(|&k| r.on[k]).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    // Peel everything off the ridges, then thin the ridges to one cell.
    thin(&mut r, &order, &anchor, false);
    zhang_suen(&mut r);
    thin(&mut r, &order, &anchor, true);
    for (on, &c) in r.on.iter_mut().zip(&d) {
        if c < min_clearance {
            *on = false;
        }
    }
    let graph = trace_graph(grid, &r, &d);
    if graph.edges.is_empty() {
        return Err(GuideError::EmptySkeleton);
    }
    Ok(graph)
}

fn trace_graph(grid: &OccupancyGrid, r: &Raster, d: &[f64]) -> SkeletonGraph {
    let center = |idx: usize| grid.center(idx % r.w, idx / r.w);
    let mut node_of = vec![usize::MAX; r.on.len()];
    let mut nodes = Vec::new();
    for idx in 0..r.on.len() {
        if r.on[idx] && r.degree(idx) != 2 {
            node_of[idx] = nodes.len();
            nodes.push(center(idx));
        }
    }
    let mut visited = vec![false; r.on.len()];
    let mut edges = Vec::new();
    let mut trace_from = |start: usize, node_of: &[usize], visited: &mut [bool]| {
        let first: Vec<usize> = r.neighbors(start).collect();
        for n0 in first {
            if node_of[n0] != usize::MAX {
                if node_of[n0] > node_of[start] {
                    edges.push(make_edge(node_of[start], node_of[n0], &[start, n0], &center, d));
                }
                continue;
            }
            if visited[n0] {
                continue;
            }
            let mut chain = vec![start, n0];
            visited[n0] = true;
            let (mut prev, mut cur) = (start, n0);
            loop {
                let next = r.neighbors(cur).find(|&q| q != prev && (!visited[q] || node_of[q] != usize::MAX));
                match next {
                    Some(q) => {
                        chain.push(q);
                        if node_of[q] != usize::MAX {
                            break;
                        }
                        visited[q] = true;
                        prev = cur;
                        cur = q;
                    }
                    None => {
                        // Closed loop back to an already visited cell.
                        chain.push(start);
                        break;
                    }
                }
            }
            let end = *chain.last().unwrap();
            edges.push(make_edge(node_of[start], node_of[end], &chain, &center, d));
        }
    };
    for idx in 0..r.on.len() {
        if node_of[idx] != usize::MAX {
            trace_from(idx, &node_of, &mut visited);
        }
    }
    // Pure cycles have no junction; promote one cell to a node.
    for idx in 0..r.on.len() {
        if r.on[idx] && !visited[idx] && node_of[idx] == usize::MAX {
            node_of[idx] = nodes.len();
            nodes.push(center(idx));
            visited[idx] = true;
            trace_from(idx, &node_of, &mut visited);
        }
    }
    SkeletonGraph { nodes, edges }
}

fn make_edge(a: usize, b: usize, chain: &[usize], center: &impl Fn(usize) -> Vec2, d: &[f64]) -> SkeletonEdge {
    let points: Vec<Vec2> = chain.iter().map(|&k| center(k)).collect();
    let mut cum = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    for (k, p) in points.iter().enumerate() {
        if k > 0 {
            acc += p.dist(points[k - 1]);
        }
        cum.push(acc);
    }
    let min_clearance = chain.iter().map(|&k| d[k]).fold(f64::INFINITY, f64::min);
    SkeletonEdge { a, b, points, cum, min_clearance }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, Aabb, Polygon, Workspace};

    fn grid(obstacles: Vec<Polygon>, cell: f64) -> OccupancyGrid {
        rasterize(&Workspace::new(Aabb::new(0.0, 0.0, 10.0, 10.0), obstacles).unwrap(), cell).unwrap()
    }

    #[test]
    fn clearance_matches_brute_force() {
        let g = grid(vec![Polygon::rect(3.0, 3.0, 5.0, 4.0).unwrap()], 0.25);
        let d = clearance_field(&g);
        for j in (0..g.height).step_by(3) {
            for i in (0..g.width).step_by(5) {
                let c = g.center(i, j);
                let mut best = f64::INFINITY;
                for jj in -1..=g.height as isize {
                    for ii in -1..=g.width as isize {
                        let inside = ii >= 0 && jj >= 0 && (ii as usize) < g.width && (jj as usize) < g.height;
                        if inside && !g.is_occupied(ii as usize, jj as usize) {
                            continue;
                        }
                        let q = Vec2::new(
                            g.origin.x + (ii as f64 + 0.5) * g.cell_size,
                            g.origin.y + (jj as f64 + 0.5) * g.cell_size,
                        );
                        best = best.min(c.dist(q));
                    }
                }
                assert!((d[g.index(i, j)] - best).abs() < 1e-9, "{i},{j}: {} vs {best}", d[g.index(i, j)]);
            }
        }
    }

    #[test]
    fn square_world_has_diagonal_cross() {
        let g = grid(vec![], 0.1);
        let sk = skeleton_extract(&g, 0.0).unwrap();
        let pts: Vec<Vec2> = sk.points().collect();
        let tol = 2.0 * g.cell_size + 1e-9;
        for k in 0..=20 {
            let t = 2.5 + 0.25 * k as f64;
            for q in [Vec2::new(t, t), Vec2::new(t, 10.0 - t)] {
                let near = pts.iter().map(|p| p.dist(q)).fold(f64::INFINITY, f64::min);
                assert!(near <= tol, "{q:?} is {near} from the skeleton");
            }
        }
    }

    #[test]
    fn corridor_centerline() {
        // Horizontal corridor y in [4, 6].
        let obstacles = vec![Polygon::rect(0.0, 0.0, 10.0, 4.0).unwrap(), Polygon::rect(0.0, 6.0, 10.0, 10.0).unwrap()];
        let g = grid(obstacles, 0.1);
        let sk = skeleton_extract(&g, 0.5).unwrap();
        let mut n = 0;
        for p in sk.points() {
            if p.x > 1.5 && p.x < 8.5 {
                assert!((p.y - 5.0).abs() <= g.cell_size + 1e-9, "{p:?}");
                n += 1;
            }
        }
        assert!(n > 50);
    }

    #[test]
    fn full_grid_rejected() {
        let g = grid(vec![Polygon::rect(-1.0, -1.0, 11.0, 11.0).unwrap()], 0.5);
        assert!(matches!(skeleton_extract(&g, 0.0), Err(GuideError::NoFreeCells)));
    }

    #[test]
    fn edge_projection_and_arc_length() {
        let e = SkeletonEdge {
            a: 0,
            b: 1,
            points: vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 2.0)],
            cum: vec![0.0, 1.0, 3.0],
            min_clearance: 1.0,
        };
        assert_eq!(e.length(), 3.0);
        assert_eq!(e.point_at(2.0), Vec2::new(1.0, 1.0));
        let (s, d) = e.project(Vec2::new(2.0, 1.5));
        assert!((s - 2.5).abs() < 1e-12 && (d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn connectivity_number_cases() {
        // Endpoint, line interior, and a bridge between two components.
        let mut ring = [false; 8];
        ring[0] = true;
        assert_eq!(connectivity_8(&ring), 1);
        ring[4] = true;
        assert_eq!(connectivity_8(&ring), 2);
        let ring = [true; 8];
        assert_eq!(connectivity_8(&ring), 0);
    }
}
