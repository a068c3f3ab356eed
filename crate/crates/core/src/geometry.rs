//! Planar primitives: points, closed intervals and simple polygons.
//!
//! Coordinates are model units with `+x` to the right and `+y` up. Polygons
//! are stored counter-clockwise; clockwise input is reversed on construction.

use alloc::format;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Default equality tolerance in model units.
pub const DEFAULT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        math::hypot(self.x - other.x, self.y - other.y)
    }

    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }
}

#[inline]
fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::DegenerateGeometry(format!("non-finite interval [{lo}, {hi}]")));
        }
        if lo >= hi {
            return Err(Error::DegenerateGeometry(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn translate(&self, dt: f64) -> Interval {
        Interval { lo: self.lo + dt, hi: self.hi + dt }
    }

    /// The interval occupied by `{-v : v in self}`.
    pub fn negate(&self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

/// Simple polygon without holes, counter-clockwise, positive area.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Validates and normalises a vertex ring. The ring is closed implicitly;
    /// a repeated closing vertex is dropped.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() >= 2 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidPolygon(format!("vertex {i} is not finite")));
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(Error::InvalidPolygon(format!("repeated vertex at {i}")));
            }
        }
        if let Some((i, j)) = first_self_intersection(&vertices) {
            return Err(Error::InvalidPolygon(format!("edges {i} and {j} intersect")));
        }
        let signed = signed_area(&vertices);
        if signed == 0.0 {
            return Err(Error::DegenerateGeometry("zero-area polygon".into()));
        }
        if signed < 0.0 {
            vertices[1..].reverse();
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned rectangle spanning the two corners.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new(alloc::vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub fn from_coords(coords: &[[f64; 2]]) -> Result<Self> {
        Self::new(coords.iter().map(|c| Point::new(c[0], c[1])).collect())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub(crate) fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Applies a point map. Orientation-reversing maps are re-normalised.
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Polygon {
        let mut vertices: Vec<Point> = self.vertices.iter().map(|&p| f(p)).collect();
        if signed_area(&vertices) < 0.0 {
            vertices[1..].reverse();
        }
        Polygon { vertices }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Polygon {
        self.map_points(|p| Point::new(p.x + dx, p.y + dy))
    }

    pub fn scale(&self, k: f64) -> Polygon {
        self.map_points(|p| Point::new(p.x * k, p.y * k))
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(&b)).sum()
    }

    /// `[min, max]` of the chosen coordinate. Extents within `eps` of zero are
    /// rejected as degenerate.
    pub fn project(&self, axis: Axis, eps: f64) -> Result<Interval> {
        let coord = |p: &Point| match axis {
            Axis::X => p.x,
            Axis::Y => p.y,
        };
        let (lo, hi) = self
            .vertices
            .iter()
            .map(coord)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi - lo <= eps.max(0.0) {
            return Err(Error::DegenerateGeometry(format!(
                "{axis:?} projection [{lo}, {hi}] collapses within tolerance {eps}"
            )));
        }
        Interval::new(lo, hi)
    }

    /// Shoelace area (always positive).
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len();
        // Shift to the first vertex to limit cancellation on far-off polygons.
        let origin = self.vertices[0];
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let p = self.vertices[i].sub(origin);
            let q = self.vertices[(i + 1) % n].sub(origin);
            let c = p.x * q.y - q.x * p.y;
            a2 += c;
            cx += (p.x + q.x) * c;
            cy += (p.y + q.y) * c;
        }
        Point::new(origin.x + cx / (3.0 * a2), origin.y + cy / (3.0 * a2))
    }

    /// Bounding box as `(min, max)` corners.
    pub fn bounds(&self) -> (Point, Point) {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        (min, max)
    }

    /// Even-odd point containment. Points exactly on the boundary may go
    /// either way.
    pub fn contains_point(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Ear-clipping triangulation; every triangle is counter-clockwise.
    pub fn triangulate(&self) -> Vec<[Point; 3]> {
        let mut ring: Vec<Point> = self.vertices.clone();
        let mut out = Vec::with_capacity(ring.len().saturating_sub(2));
        drop_collinear(&mut ring);
        while ring.len() > 3 {
            let n = ring.len();
            let ear = (0..n).find(|&i| is_ear(&ring, i)).unwrap_or_else(|| {
                // Numerical fallback: clip the most convex corner.
                (0..n)
                    .max_by(|&i, &j| {
                        corner_cross(&ring, i).partial_cmp(&corner_cross(&ring, j)).unwrap_or(core::cmp::Ordering::Equal)
                    })
                    .unwrap_or(0)
            });
            let prev = ring[(ear + n - 1) % n];
            let next = ring[(ear + 1) % n];
            out.push([prev, ring[ear], next]);
            ring.remove(ear);
            drop_collinear(&mut ring);
        }
        if ring.len() == 3 && cross(ring[0], ring[1], ring[2]) > 0.0 {
            out.push([ring[0], ring[1], ring[2]]);
        }
        out
    }
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    let origin = v[0];
    let mut s = 0.0;
    for i in 0..n {
        let p = v[i].sub(origin);
        let q = v[(i + 1) % n].sub(origin);
        s += p.x * q.y - q.x * p.y;
    }
    s / 2.0
}

fn corner_cross(ring: &[Point], i: usize) -> f64 {
    let n = ring.len();
    cross(ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n])
}

fn drop_collinear(ring: &mut Vec<Point>) {
    let mut i = 0;
    while ring.len() > 3 && i < ring.len() {
        if corner_cross(ring, i) == 0.0 {
            ring.remove(i);
            i = i.saturating_sub(1);
        } else {
            i += 1;
        }
    }
}

fn is_ear(ring: &[Point], i: usize) -> bool {
    let n = ring.len();
    let a = ring[(i + n - 1) % n];
    let b = ring[i];
    let c = ring[(i + 1) % n];
    if cross(a, b, c) <= 0.0 {
        return false;
    }
    ring.iter().enumerate().all(|(k, &p)| {
        if k == i || k == (i + n - 1) % n || k == (i + 1) % n || p == a || p == b || p == c {
            return true;
        }
        // Blocked by any vertex inside or on the candidate triangle.
        !(cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0)
    })
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, exact in the orientation predicates.
fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn first_self_intersection(v: &[Point]) -> Option<(usize, usize)> {
    let n = v.len();
    for i in 0..n {
        let (a1, a2) = (v[i], v[(i + 1) % n]);
        for j in (i + 1)..n {
            let (b1, b2) = (v[j], v[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Neighbouring edges share one endpoint; they must not fold back.
                let (shared, other_a, other_b) = if j == i + 1 { (a2, a1, b2) } else { (a1, a2, b1) };
                if cross(shared, other_a, other_b) == 0.0 && (other_a.sub(shared)).dot(other_b.sub(shared)) > 0.0 {
                    return Some((i, j));
                }
                continue;
            }
            if segments_intersect(a1, a2, b1, b2) {
                return Some((i, j));
            }
        }
    }
    None
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(&a);
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(&a.add(ab.scale(t)))
}

fn segment_distance(p1: Point, p2: Point, q1: Point, q2: Point) -> f64 {
    if segments_intersect(p1, p2, q1, q2) {
        return 0.0;
    }
    point_segment_distance(p1, q1, q2)
        .min(point_segment_distance(p2, q1, q2))
        .min(point_segment_distance(q1, p1, p2))
        .min(point_segment_distance(q2, p1, p2))
}

fn boxes_overlap(a: &Polygon, b: &Polygon, slack: f64) -> bool {
    let (amin, amax) = a.bounds();
    let (bmin, bmax) = b.bounds();
    amin.x <= bmax.x + slack && bmin.x <= amax.x + slack && amin.y <= bmax.y + slack && bmin.y <= amax.y + slack
}

/// Clips a convex polygon against a counter-clockwise triangle.
fn clip_convex(subject: &[Point], clip: &[Point; 3]) -> Vec<Point> {
    let mut output: Vec<Point> = subject.to_vec();
    for k in 0..3 {
        if output.is_empty() {
            break;
        }
        let (e0, e1) = (clip[k], clip[(k + 1) % 3]);
        let input = core::mem::take(&mut output);
        let m = input.len();
        for i in 0..m {
            let cur = input[i];
            let prev = input[(i + m - 1) % m];
            let cur_in = cross(e0, e1, cur) >= 0.0;
            let prev_in = cross(e0, e1, prev) >= 0.0;
            if cur_in {
                if !prev_in {
                    output.push(line_intersection(prev, cur, e0, e1));
                }
                output.push(cur);
            } else if prev_in {
                output.push(line_intersection(prev, cur, e0, e1));
            }
        }
    }
    output
}

fn line_intersection(p: Point, q: Point, a: Point, b: Point) -> Point {
    let dp = cross(a, b, p);
    let dq = cross(a, b, q);
    let t = dp / (dp - dq);
    p.add(q.sub(p).scale(t))
}

fn ring_area(v: &[Point]) -> f64 {
    if v.len() < 3 {
        return 0.0;
    }
    signed_area(v).abs()
}

/// Area of `a ∩ b`. Both polygons are triangulated and every triangle pair
/// is clipped; triangles of one triangulation have disjoint interiors, so the
/// pairwise areas sum to the exact overlap.
pub fn intersection_area(a: &Polygon, b: &Polygon) -> f64 {
    if !boxes_overlap(a, b, 0.0) {
        return 0.0;
    }
    let ta = a.triangulate();
    let tb = b.triangulate();
    let mut total = 0.0;
    for s in &ta {
        for c in &tb {
            total += ring_area(&clip_convex(s, c));
        }
    }
    total.min(a.area()).min(b.area()).max(0.0)
}

/// Minimum distance between the two boundary polylines.
pub fn boundary_distance(a: &Polygon, b: &Polygon) -> f64 {
    let mut best = f64::INFINITY;
    for (p1, p2) in a.edges() {
        for (q1, q2) in b.edges() {
            best = best.min(segment_distance(p1, p2, q1, q2));
            if best == 0.0 {
                return 0.0;
            }
        }
    }
    best
}

/// True iff the boundaries come within `eps` of each other.
pub fn boundaries_touch(a: &Polygon, b: &Polygon, eps: f64) -> bool {
    if !boxes_overlap(a, b, eps.max(0.0)) {
        return false;
    }
    boundary_distance(a, b) <= eps
}

/// Arc-length walk along the boundary starting at vertex `start`; returns
/// `count` points spaced `perimeter / count` apart.
pub(crate) fn resample_boundary(p: &Polygon, start: usize, count: usize) -> Vec<Point> {
    let n = p.vertices.len();
    let perimeter = p.perimeter();
    let step = perimeter / count as f64;
    let mut out = Vec::with_capacity(count);
    let mut edge = 0usize;
    let mut edge_start_len = 0.0;
    let mut a = p.vertices[start % n];
    let mut b = p.vertices[(start + 1) % n];
    let mut edge_len = a.distance(&b);
    for k in 0..count {
        let target = step * k as f64;
        while edge_start_len + edge_len < target && edge + 1 < n {
            edge_start_len += edge_len;
            edge += 1;
            a = b;
            b = p.vertices[(start + edge + 1) % n];
            edge_len = a.distance(&b);
        }
        let t = if edge_len > 0.0 { ((target - edge_start_len) / edge_len).clamp(0.0, 1.0) } else { 0.0 };
        out.push(if t == 0.0 { a } else if t == 1.0 { b } else { a.add(b.sub(a).scale(t)) });
    }
    out
}
