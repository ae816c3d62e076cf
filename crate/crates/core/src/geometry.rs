//! Planar geometry for an oriented rectangle robot among polygonal obstacles.
//!
//! Obstacles are closed sets: touching a boundary counts as a collision.
//! Non-convex obstacles are split into triangles once, at load time, so the
//! collision primitive stays a separating-axis test between convex pieces.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{GuideError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Left-hand normal (rotated +90°).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotate(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut t = (theta + PI).rem_euclid(two_pi) - PI;
    // rem_euclid can return exactly 2π for tiny negative inputs.
    if t >= PI {
        t -= two_pi;
    }
    t
}

/// An SE(2) configuration. `theta` is always kept in `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose { x, y, theta: wrap_angle(theta) }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.theta]
    }
}

impl From<[f64; 3]> for Pose {
    fn from(a: [f64; 3]) -> Self {
        Pose::new(a[0], a[1], a[2])
    }
}

/// Axis-aligned box, closed on all sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec2,
    pub max: Vec2,
}

impl Aabb {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Self {
        Aabb { min: Vec2::new(xmin, ymin), max: Vec2::new(xmax, ymax) }
    }

    pub fn from_points(pts: &[Vec2]) -> Self {
        let mut b = Aabb { min: pts[0], max: pts[0] };
        for p in &pts[1..] {
            b.min.x = b.min.x.min(p.x);
            b.min.y = b.min.y.min(p.y);
            b.max.x = b.max.x.max(p.x);
            b.max.y = b.max.y.max(p.y);
        }
        b
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Vec2 {
        (self.min + self.max) * 0.5
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn intersects(&self, o: &Aabb) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.min.x, self.min.y, self.max.x, self.max.y]
    }
}

/// A simple polygon with counter-clockwise vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>() * 0.5
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed segment intersection test.
pub fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

impl Polygon {
    /// Builds a polygon, reversing clockwise input. Rejects fewer than three
    /// vertices, non-finite coordinates, zero area and self-intersections.
    pub fn new(mut vertices: Vec<Vec2>) -> Result<Self> {
        if vertices.len() >= 2 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(GuideError::DegeneratePolygon(format!("{} vertices", vertices.len())));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GuideError::DegeneratePolygon("non-finite vertex".into()));
        }
        let area = signed_area(&vertices);
        let scale = Aabb::from_points(&vertices).diagonal().max(1e-300);
        if area.abs() <= 1e-12 * scale * scale {
            return Err(GuideError::DegeneratePolygon("zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n]) {
                    return Err(GuideError::DegeneratePolygon("self-intersecting".into()));
                }
            }
        }
        Ok(Polygon { vertices })
    }

    pub fn from_points(pts: &[[f64; 2]]) -> Result<Self> {
        Polygon::new(pts.iter().map(|p| Vec2::new(p[0], p[1])).collect())
    }

    /// Axis-aligned rectangle `[xmin, xmax] × [ymin, ymax]`.
    pub fn rect(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self> {
        Polygon::new(vec![
            Vec2::new(xmin, ymin),
            Vec2::new(xmax, ymin),
            Vec2::new(xmax, ymax),
            Vec2::new(xmin, ymax),
        ])
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    pub fn is_convex(&self) -> bool {
        let v = &self.vertices;
        let n = v.len();
        let scale = self.aabb().diagonal();
        (0..n).all(|i| orient(v[i], v[(i + 1) % n], v[(i + 2) % n]) >= -1e-12 * scale * scale)
    }

    /// Closed point containment (boundary counts as inside).
    pub fn contains(&self, p: Vec2) -> bool {
        let v = &self.vertices;
        let n = v.len();
        // Boundary first, then even-odd ray casting.
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            if orient(a, b, p) == 0.0 && on_segment(a, b, p) {
                return true;
            }
        }
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (v[i], v[j]);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Ear-clipping triangulation. Convex polygons are returned unchanged.
    pub fn convex_decomposition(&self) -> Result<Vec<Polygon>> {
        if self.is_convex() {
            return Ok(vec![self.clone()]);
        }
        let mut idx: Vec<usize> = (0..self.vertices.len()).collect();
        let v = &self.vertices;
        let mut out = Vec::with_capacity(v.len() - 2);
        while idx.len() > 3 {
            let m = idx.len();
            let mut clipped = false;
            for k in 0..m {
                let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
                let (a, b, c) = (v[ia], v[ib], v[ic]);
                if orient(a, b, c) <= 0.0 {
                    continue;
                }
                let blocked = idx.iter().any(|&j| {
                    j != ia && j != ib && j != ic && {
                        let p = v[j];
                        orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0
                    }
                });
                if blocked {
                    continue;
                }
                out.push(Polygon { vertices: vec![a, b, c] });
                idx.remove(k);
                clipped = true;
                break;
            }
            if !clipped {
                return Err(GuideError::DegeneratePolygon("ear clipping failed".into()));
            }
        }
        let tri: Vec<Vec2> = idx.iter().map(|&i| v[i]).collect();
        if orient(tri[0], tri[1], tri[2]) > 0.0 {
            out.push(Polygon { vertices: tri });
        }
        Ok(out)
    }
}

fn project(poly: &[Vec2], axis: Vec2) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in poly {
        let d = p.dot(axis);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    (lo, hi)
}

fn separated_along_edges(a: &[Vec2], b: &[Vec2]) -> bool {
    let n = a.len();
    (0..n).any(|i| {
        let axis = (a[(i + 1) % n] - a[i]).perp();
        let (alo, ahi) = project(a, axis);
        let (blo, bhi) = project(b, axis);
        ahi < blo || bhi < alo
    })
}

/// Separating-axis test on raw convex vertex lists (either orientation).
pub(crate) fn convex_vertices_overlap(a: &[Vec2], b: &[Vec2]) -> bool {
    !(separated_along_edges(a, b) || separated_along_edges(b, a))
}

/// True iff two convex polygons share any point (boundaries included).
pub fn convex_overlap(a: &Polygon, b: &Polygon) -> Result<bool> {
    if !a.is_convex() || !b.is_convex() {
        return Err(GuideError::NonConvex);
    }
    Ok(convex_vertices_overlap(&a.vertices, &b.vertices))
}

/// Rectangle robot described by its half extents along its local x and y axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectRobot {
    pub half_length: f64,
    pub half_width: f64,
}

impl RectRobot {
    pub fn new(half_length: f64, half_width: f64) -> Result<Self> {
        if !(half_length > 0.0 && half_width > 0.0) || !half_length.is_finite() || !half_width.is_finite() {
            return Err(GuideError::InvalidParameter(format!(
                "robot half extents must be positive, got ({half_length}, {half_width})"
            )));
        }
        Ok(RectRobot { half_length, half_width })
    }

    pub fn circumradius(&self) -> f64 {
        self.half_length.hypot(self.half_width)
    }
}

/// Corners of the robot footprint at `pose`, counter-clockwise.
pub fn rect_corners(robot: &RectRobot, pose: &Pose) -> [Vec2; 4] {
    let c = pose.position();
    let (l, w) = (robot.half_length, robot.half_width);
    [Vec2::new(l, w), Vec2::new(-l, w), Vec2::new(-l, -w), Vec2::new(l, -w)].map(|p| c + p.rotate(pose.theta))
}

#[derive(Debug, Clone)]
struct ConvexPiece {
    vertices: Vec<Vec2>,
    aabb: Aabb,
}

/// Obstacles preprocessed into convex pieces with bounding boxes.
#[derive(Debug, Clone)]
pub struct Workspace {
    bounds: Aabb,
    obstacles: Vec<Polygon>,
    pieces: Vec<ConvexPiece>,
}

impl Workspace {
    pub fn new(bounds: Aabb, obstacles: Vec<Polygon>) -> Result<Self> {
        if !(bounds.width() >= 0.0 && bounds.height() >= 0.0) || !bounds.min.is_finite() || !bounds.max.is_finite() {
            return Err(GuideError::InvalidParameter("bounds must be finite with min <= max".into()));
        }
        let mut pieces = Vec::new();
        for o in &obstacles {
            for p in o.convex_decomposition()? {
                let aabb = p.aabb();
                pieces.push(ConvexPiece { vertices: p.vertices, aabb });
            }
        }
        Ok(Workspace { bounds, obstacles, pieces })
    }

    pub fn bounds(&self) -> Aabb {
        self.bounds
    }

    pub fn obstacles(&self) -> &[Polygon] {
        &self.obstacles
    }

    /// Closed containment of a point in any obstacle.
    pub fn point_in_obstacle(&self, p: Vec2) -> bool {
        self.pieces.iter().any(|pc| {
            pc.aabb.contains(p) && {
                let v = &pc.vertices;
                let n = v.len();
                (0..n).all(|i| orient(v[i], v[(i + 1) % n], p) >= 0.0)
            }
        })
    }

    pub fn robot_in_collision(&self, robot: &RectRobot, pose: &Pose) -> bool {
        let corners = rect_corners(robot, pose);
        if corners.iter().any(|c| !self.bounds.contains(*c)) {
            return true;
        }
        let bb = Aabb::from_points(&corners);
        self.pieces
            .iter()
            .any(|pc| pc.aabb.intersects(&bb) && convex_vertices_overlap(&corners, &pc.vertices))
    }
}

/// One-shot collision query; obstacles are decomposed on every call. Use
/// [`Workspace`] when checking many poses against the same obstacles.
pub fn robot_in_collision(robot: &RectRobot, pose: &Pose, obstacles: &[Polygon], bounds: Aabb) -> Result<bool> {
    Ok(Workspace::new(bounds, obstacles.to_vec())?.robot_in_collision(robot, pose))
}

/// Row-major boolean occupancy raster: cell `(i, j)` is column `i`, row `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub origin: Vec2,
    pub cell_size: f64,
    pub width: usize,
    pub height: usize,
    pub occupied: Vec<bool>,
}

impl OccupancyGrid {
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + (i as f64 + 0.5) * self.cell_size,
            self.origin.y + (j as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn is_occupied(&self, i: usize, j: usize) -> bool {
        self.occupied[self.index(i, j)]
    }

    /// Cell containing `p`, if inside the raster.
    pub fn cell_of(&self, p: Vec2) -> Option<(usize, usize)> {
        let fx = ((p.x - self.origin.x) / self.cell_size).floor();
        let fy = ((p.y - self.origin.y) / self.cell_size).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.width as f64 || fy >= self.height as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    pub fn occupied_fraction(&self) -> f64 {
        self.occupied.iter().filter(|&&o| o).count() as f64 / self.occupied.len() as f64
    }
}

/// Rasterizes obstacles: a cell is occupied iff its center lies inside an
/// obstacle or outside `bounds`.
pub fn rasterize(workspace: &Workspace, cell_size: f64) -> Result<OccupancyGrid> {
    if !(cell_size > 0.0) || !cell_size.is_finite() {
        return Err(GuideError::InvalidParameter(format!("cell_size must be positive, got {cell_size}")));
    }
    let b = workspace.bounds();
    let width = ((b.width() / cell_size).ceil() as usize).max(1);
    let height = ((b.height() / cell_size).ceil() as usize).max(1);
    let mut grid = OccupancyGrid { origin: b.min, cell_size, width, height, occupied: vec![false; width * height] };
    for j in 0..height {
        for i in 0..width {
            let c = grid.center(i, j);
            let idx = grid.index(i, j);
            grid.occupied[idx] = !b.contains(c) || workspace.point_in_obstacle(c);
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotDesc {
    pub half_length: f64,
    pub half_width: f64,
}

/// On-disk environment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentDesc {
    pub bounds: [f64; 4],
    pub robot: RobotDesc,
    pub obstacles: Vec<Vec<[f64; 2]>>,
    pub start: [f64; 3],
    pub goal: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_horizon: Option<f64>,
}

impl EnvironmentDesc {
    pub fn bounds_box(&self) -> Aabb {
        let b = self.bounds;
        Aabb::new(b[0], b[1], b[2], b[3])
    }

    pub fn robot(&self) -> Result<RectRobot> {
        RectRobot::new(self.robot.half_length, self.robot.half_width)
    }

    pub fn polygons(&self) -> Result<Vec<Polygon>> {
        self.obstacles.iter().map(|o| Polygon::from_points(o)).collect()
    }

    pub fn workspace(&self) -> Result<Workspace> {
        Workspace::new(self.bounds_box(), self.polygons()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square(cx: f64, cy: f64, half: f64) -> Polygon {
        Polygon::rect(cx - half, cy - half, cx + half, cy + half).unwrap()
    }

    fn same_set(got: &[Vec2], want: &[Vec2]) {
        for w in want {
            assert!(got.iter().any(|g| g.dist(*w) < 1e-12), "missing {w:?} in {got:?}");
        }
    }

    #[test]
    fn corners_axis_aligned_and_quarter_turn() {
        let r = RectRobot::new(1.0, 0.5).unwrap();
        let c = rect_corners(&r, &Pose::new(0.0, 0.0, 0.0));
        same_set(&c, &[Vec2::new(1.0, 0.5), Vec2::new(-1.0, 0.5), Vec2::new(-1.0, -0.5), Vec2::new(1.0, -0.5)]);
        let c = rect_corners(&r, &Pose::new(0.0, 0.0, PI / 2.0));
        same_set(&c, &[Vec2::new(-0.5, 1.0), Vec2::new(-0.5, -1.0), Vec2::new(0.5, -1.0), Vec2::new(0.5, 1.0)]);
        assert!(signed_area(&c) > 0.0);
    }

    #[test]
    fn corners_rotated_are_on_circumcircle() {
        let r = RectRobot::new(1.0, 1.0).unwrap();
        for c in rect_corners(&r, &Pose::new(3.0, 4.0, PI / 4.0)) {
            assert_relative_eq!(c.dist(Vec2::new(3.0, 4.0)), 2f64.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), -PI);
        assert_relative_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-12);
        assert_relative_eq!(wrap_angle(-3.0 * PI), -PI, epsilon = 1e-12);
        for k in -50..50 {
            let t = wrap_angle(k as f64 * 0.37);
            assert!((-PI..PI).contains(&t));
        }
    }

    #[test]
    fn overlap_basic_cases() {
        let a = square(0.0, 0.0, 0.5);
        assert!(!convex_overlap(&a, &square(3.0, 0.0, 0.5)).unwrap());
        assert!(convex_overlap(&a, &a.clone()).unwrap());
        assert!(convex_overlap(&a, &square(0.99, 0.0, 0.5)).unwrap());
        // touching edges count
        assert!(convex_overlap(&a, &square(1.0, 0.0, 0.5)).unwrap());
        assert!(!convex_overlap(&a, &square(1.0 + 1e-9, 0.0, 0.5)).unwrap());
    }

    #[test]
    fn overlap_rejects_nonconvex() {
        let l = Polygon::from_points(&[[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]]).unwrap();
        assert!(matches!(convex_overlap(&l, &square(0.0, 0.0, 1.0)), Err(GuideError::NonConvex)));
    }

    #[test]
    fn polygon_validation() {
        assert!(Polygon::from_points(&[[0.0, 0.0], [1.0, 0.0]]).is_err());
        assert!(Polygon::from_points(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).is_err());
        // bow tie
        assert!(Polygon::from_points(&[[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).is_err());
        // clockwise input is reoriented
        let p = Polygon::from_points(&[[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(p.area() > 0.0);
    }

    #[test]
    fn ear_clipping_preserves_area() {
        let u = Polygon::from_points(&[
            [0.0, 0.0],
            [3.0, 0.0],
            [3.0, 3.0],
            [2.0, 3.0],
            [2.0, 1.0],
            [1.0, 1.0],
            [1.0, 3.0],
            [0.0, 3.0],
        ])
        .unwrap();
        let tris = u.convex_decomposition().unwrap();
        assert_eq!(tris.len(), 6);
        let total: f64 = tris.iter().map(Polygon::area).sum();
        assert_relative_eq!(total, u.area(), epsilon = 1e-12);
        assert!(tris.iter().all(Polygon::is_convex));
    }

    #[test]
    fn collision_basic_cases() {
        let r = RectRobot::new(0.6, 0.25).unwrap();
        let bounds = Aabb::new(0.0, 0.0, 10.0, 10.0);
        assert!(!robot_in_collision(&r, &Pose::new(5.0, 5.0, 0.3), &[], bounds).unwrap());
        let obs = [square(5.0, 5.0, 1.0)];
        assert!(robot_in_collision(&r, &Pose::new(5.0, 5.0, 0.3), &obs, bounds).unwrap());
        assert!(robot_in_collision(&r, &Pose::new(0.3, 5.0, 0.0), &[], bounds).unwrap());
    }

    #[test]
    fn collision_periodic_in_theta() {
        let r = RectRobot::new(0.6, 0.25).unwrap();
        let ws = Workspace::new(Aabb::new(0.0, 0.0, 10.0, 10.0), vec![square(5.0, 5.0, 1.0)]).unwrap();
        for k in 0..200 {
            let th = -PI + k as f64 * 0.0314;
            let x = 3.3 + (k % 7) as f64 * 0.05;
            let a = ws.robot_in_collision(&r, &Pose::new(x, 5.2, th));
            let b = ws.robot_in_collision(&r, &Pose::new(x, 5.2, th + 2.0 * PI));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rasterize_empty_and_half() {
        let ws = Workspace::new(Aabb::new(0.0, 0.0, 10.0, 10.0), vec![]).unwrap();
        let g = rasterize(&ws, 0.5).unwrap();
        assert_eq!((g.width, g.height), (20, 20));
        assert!(g.occupied.iter().all(|o| !o));

        let ws = Workspace::new(Aabb::new(0.0, 0.0, 10.0, 10.0), vec![Polygon::rect(0.0, 0.0, 5.0, 10.0).unwrap()]).unwrap();
        let g = rasterize(&ws, 0.5).unwrap();
        for j in 0..g.height {
            for i in 0..g.width {
                assert_eq!(g.is_occupied(i, j), i < 10, "cell {i},{j}");
            }
        }
        assert!(rasterize(&ws, 0.0).is_err());
    }

    #[test]
    fn env_json_roundtrip_optional_keys() {
        let txt = r#"{"bounds":[0,0,10,10],"robot":{"half_length":0.6,"half_width":0.25},
            "obstacles":[[[4,0],[6,0],[6,4],[4,4]]],"start":[1,1,0],"goal":[9,9,0],"goal_horizon":1.5}"#;
        let env: EnvironmentDesc = serde_json::from_str(txt).unwrap();
        assert_eq!(env.goal_horizon, Some(1.5));
        assert_eq!(env.theta_weight, None);
        let back: EnvironmentDesc = serde_json::from_str(&serde_json::to_string(&env).unwrap()).unwrap();
        assert_eq!(back, env);
        assert_eq!(env.workspace().unwrap().obstacles().len(), 1);
    }
}
