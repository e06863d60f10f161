//! Planar Delaunay triangulation, point location and inverse-distance
//! interpolation over a single triangle.
//!
//! Triangles are stored counter-clockwise. Orientation tests use exact
//! adaptive predicates; the in-circle test is the lifted 3x3 determinant
//! with an absolute tolerance of [`INCIRCLE_TOLERANCE`]. When four points are
//! co-circular within that tolerance the diagonal touching the lowest vertex
//! index wins, which is equivalent to a symbolic perturbation of the lifted
//! points and keeps the result independent of floating noise.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Two points closer than this are treated as the same point.
pub const POINT_TOLERANCE: f64 = 1e-9;

/// Absolute margin on the in-circle determinant below which four points are
/// considered co-circular.
pub const INCIRCLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;

    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;

    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::fmt::Display for Point2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("triangulation needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("degenerate input: {0}")]
    DegenerateInput(Degeneracy),
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum Degeneracy {
    #[error("all points are collinear")]
    Collinear,
    #[error("points {first} and {second} coincide")]
    Duplicate { first: usize, second: usize },
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),
}

/// Result of [`Triangulation::locate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Triangle(usize),
    Outside,
}

/// An immutable Delaunay triangulation.
///
/// `neighbors[t][k]` is the triangle across the edge opposite vertex `k` of
/// triangle `t`, or `None` on the convex hull. Triangles are canonicalized so
/// the smallest vertex index comes first and the list is sorted, which makes
/// two triangulations of the same input compare equal.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    neighbors: Vec<[Option<usize>; 3]>,
}

/// Signed orientation of `c` relative to the directed line `a -> b`.
/// Positive when the three points turn counter-clockwise. Exact.
pub fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    robust::orient2d(coord(a), coord(b), coord(c))
}

fn coord(p: Point2) -> robust::Coord<f64> {
    robust::Coord { x: p.x, y: p.y }
}

/// Lifted in-circle determinant. Positive when `d` lies inside the
/// circumcircle of the counter-clockwise triangle `(a, b, c)`.
pub fn incircle(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    let (adx, ady) = (a.x - d.x, a.y - d.y);
    let (bdx, bdy) = (b.x - d.x, b.y - d.y);
    let (cdx, cdy) = (c.x - d.x, c.y - d.y);
    let alift = adx * adx + ady * ady;
    let blift = bdx * bdx + bdy * bdy;
    let clift = cdx * cdx + cdy * cdy;
    alift * (bdx * cdy - cdx * bdy)
        + blift * (cdx * ady - adx * cdy)
        + clift * (adx * bdy - bdx * ady)
}

pub fn triangulate(points: &[Point2]) -> Result<Triangulation, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::TooFewPoints(points.len()));
    }
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(GeometryError::DegenerateInput(Degeneracy::NonFinite(i)));
    }
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if points[i].distance(points[j]) <= POINT_TOLERANCE {
                return Err(GeometryError::DegenerateInput(Degeneracy::Duplicate {
                    first: i,
                    second: j,
                }));
            }
        }
    }
    let third = (2..points.len())
        .find(|&k| orient(points[0], points[1], points[k]) != 0.0)
        .ok_or(GeometryError::DegenerateInput(Degeneracy::Collinear))?;

    let mut builder = Builder::new(points);
    if orient(points[0], points[1], points[third]) > 0.0 {
        builder.add([0, 1, third]);
    } else {
        builder.add([0, third, 1]);
    }
    for i in (2..points.len()).filter(|&i| i != third) {
        builder.insert(i);
    }
    Ok(builder.finish())
}

struct Builder<'a> {
    points: &'a [Point2],
    triangles: Vec<[usize; 3]>,
    alive: Vec<bool>,
    edges: HashMap<(usize, usize), usize>,
    flip_budget: usize,
}

impl<'a> Builder<'a> {
    fn new(points: &'a [Point2]) -> Self {
        let n = points.len();
        Self {
            points,
            triangles: Vec::with_capacity(2 * n),
            alive: Vec::with_capacity(2 * n),
            edges: HashMap::with_capacity(6 * n),
            // Lawson flipping terminates on its own; the budget only matters
            // if tolerance effects ever produced a cycle.
            flip_budget: 64 * n * n + 1024,
        }
    }

    fn add(&mut self, tri: [usize; 3]) -> usize {
        let t = self.triangles.len();
        self.triangles.push(tri);
        self.alive.push(true);
        for k in 0..3 {
            self.edges.insert((tri[k], tri[(k + 1) % 3]), t);
        }
        t
    }

    fn kill(&mut self, t: usize) {
        let tri = self.triangles[t];
        self.alive[t] = false;
        for k in 0..3 {
            self.edges.remove(&(tri[k], tri[(k + 1) % 3]));
        }
    }

    fn pt(&self, i: usize) -> Point2 {
        self.points[i]
    }

    fn insert(&mut self, v: usize) {
        let p = self.pt(v);
        let mut host = None;
        for t in 0..self.triangles.len() {
            if !self.alive[t] {
                continue;
            }
            let [a, b, c] = self.triangles[t];
            let o = [
                orient(self.pt(b), self.pt(c), p),
                orient(self.pt(c), self.pt(a), p),
                orient(self.pt(a), self.pt(b), p),
            ];
            if o.iter().all(|&x| x >= 0.0) {
                host = Some((t, o));
                break;
            }
        }

        let mut pending = Vec::new();
        match host {
            Some((t, o)) => match o.iter().position(|&x| x == 0.0) {
                None => {
                    let [a, b, c] = self.triangles[t];
                    self.kill(t);
                    self.add([a, b, v]);
                    self.add([b, c, v]);
                    self.add([c, a, v]);
                    pending.extend([(a, b), (b, c), (c, a)]);
                }
                Some(k) => {
                    let tri = self.triangles[t];
                    let (w, u, x) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
                    let across = self.edges.get(&(x, u)).copied();
                    self.kill(t);
                    self.add([w, u, v]);
                    self.add([w, v, x]);
                    pending.extend([(w, u), (x, w)]);
                    if let Some(n) = across {
                        let z = third_vertex(self.triangles[n], x, u);
                        self.kill(n);
                        self.add([z, x, v]);
                        self.add([z, v, u]);
                        pending.extend([(z, x), (u, z)]);
                    }
                }
            },
            None => {
                let mut visible = Vec::new();
                for t in 0..self.triangles.len() {
                    if !self.alive[t] {
                        continue;
                    }
                    let tri = self.triangles[t];
                    for k in 0..3 {
                        let (a, b) = (tri[k], tri[(k + 1) % 3]);
                        if !self.edges.contains_key(&(b, a))
                            && orient(self.pt(a), self.pt(b), p) < 0.0
                        {
                            visible.push((a, b));
                        }
                    }
                }
                for (a, b) in visible {
                    self.add([b, a, v]);
                    pending.push((b, a));
                }
            }
        }
        self.legalize(v, pending);
    }

    /// Restores the Delaunay property around the freshly inserted vertex
    /// `v`. Each pending entry is an edge `(a, b)` of a triangle `(a, b, v)`.
    fn legalize(&mut self, v: usize, mut pending: Vec<(usize, usize)>) {
        while let Some((a, b)) = pending.pop() {
            let Some(&t) = self.edges.get(&(a, b)) else {
                continue;
            };
            if third_vertex(self.triangles[t], a, b) != v {
                continue;
            }
            let Some(&n) = self.edges.get(&(b, a)) else {
                continue;
            };
            let d = third_vertex(self.triangles[n], b, a);
            if self.flip_budget == 0 || !self.should_flip(a, b, v, d) {
                continue;
            }
            self.flip_budget -= 1;
            self.kill(t);
            self.kill(n);
            self.add([v, a, d]);
            self.add([v, d, b]);
            pending.push((a, d));
            pending.push((d, b));
        }
    }

    fn should_flip(&self, a: usize, b: usize, v: usize, d: usize) -> bool {
        let (pa, pb, pv, pd) = (self.pt(a), self.pt(b), self.pt(v), self.pt(d));
        if orient(pv, pa, pd) <= 0.0 || orient(pv, pd, pb) <= 0.0 {
            return false;
        }
        let det = incircle(pa, pb, pv, pd);
        if det > INCIRCLE_TOLERANCE {
            true
        } else if det < -INCIRCLE_TOLERANCE {
            false
        } else {
            v.min(d) < a.min(b)
        }
    }

    fn finish(self) -> Triangulation {
        let mut triangles: Vec<[usize; 3]> = self
            .triangles
            .iter()
            .zip(&self.alive)
            .filter(|(_, &alive)| alive)
            .map(|(tri, _)| canonical(*tri))
            .collect();
        triangles.sort_unstable();
        let neighbors = neighbors_of(&triangles);
        Triangulation {
            vertices: self.points.to_vec(),
            triangles,
            neighbors,
        }
    }
}

fn third_vertex(tri: [usize; 3], a: usize, b: usize) -> usize {
    tri.into_iter()
        .find(|&x| x != a && x != b)
        .expect("triangle has three distinct vertices")
}

fn canonical(tri: [usize; 3]) -> [usize; 3] {
    let k = (0..3).min_by_key(|&k| tri[k]).unwrap();
    [tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]]
}

fn neighbors_of(triangles: &[[usize; 3]]) -> Vec<[Option<usize>; 3]> {
    let mut owner = HashMap::with_capacity(3 * triangles.len());
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            owner.insert((tri[k], tri[(k + 1) % 3]), t);
        }
    }
    triangles
        .iter()
        .map(|tri| {
            let mut out = [None; 3];
            for (k, slot) in out.iter_mut().enumerate() {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                *slot = owner.get(&(b, a)).copied();
            }
            out
        })
        .collect()
}

impl Triangulation {
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn neighbors(&self) -> &[[Option<usize>; 3]] {
        &self.neighbors
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn corners(&self, t: usize) -> [Point2; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        let boundary: usize = self
            .neighbors
            .iter()
            .map(|n| n.iter().filter(|x| x.is_none()).count())
            .sum();
        (3 * self.triangles.len() + boundary) / 2
    }

    /// Vertices on the convex hull boundary, including collinear ones.
    pub fn hull_vertices(&self) -> Vec<usize> {
        let mut hull: Vec<usize> = self
            .triangles
            .iter()
            .zip(&self.neighbors)
            .flat_map(|(tri, n)| {
                (0..3)
                    .filter(|&k| n[k].is_none())
                    .flat_map(move |k| [tri[(k + 1) % 3], tri[(k + 2) % 3]])
            })
            .collect();
        hull.sort_unstable();
        hull.dedup();
        hull
    }

    /// Closed containment test for triangle `t`.
    pub fn contains(&self, t: usize, p: Point2) -> bool {
        let [a, b, c] = self.corners(t);
        orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0
    }

    /// Finds the triangle containing `p`. Points on a shared edge or vertex
    /// belong to the lowest-index incident triangle; points on the hull
    /// boundary are inside.
    pub fn locate(&self, p: Point2) -> Location {
        if self.triangles.is_empty() || !p.is_finite() {
            return Location::Outside;
        }
        let mut t = 0;
        let mut steps = 0;
        let cap = 3 * self.triangles.len() + 8;
        loop {
            let corners = self.corners(t);
            let mut exit = None;
            let mut on_boundary = false;
            for k in 0..3 {
                let o = orient(corners[(k + 1) % 3], corners[(k + 2) % 3], p);
                if o < 0.0 {
                    exit = Some(k);
                    break;
                }
                on_boundary |= o == 0.0;
            }
            match exit {
                None if on_boundary => return self.locate_scan(p),
                None => return Location::Triangle(t),
                Some(k) => match self.neighbors[t][k] {
                    // p is strictly outside a hull edge, hence outside the hull.
                    None => return Location::Outside,
                    Some(next) => t = next,
                },
            }
            steps += 1;
            if steps > cap {
                return self.locate_scan(p);
            }
        }
    }

    fn locate_scan(&self, p: Point2) -> Location {
        (0..self.triangles.len())
            .find(|&t| self.contains(t, p))
            .map_or(Location::Outside, Location::Triangle)
    }

    /// Index of the vertex nearest to `p`; ties go to the lower index.
    pub fn nearest_vertex(&self, p: Point2) -> usize {
        nearest_index(&self.vertices, p)
    }
}

pub(crate) fn nearest_index(points: &[Point2], p: Point2) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, q) in points.iter().enumerate() {
        let d = q.distance(p);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Inverse-distance weights of a query point against a triangle's corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdwWeights {
    /// The query coincides with this corner.
    Vertex(usize),
    Weights([f64; 3]),
}

impl IdwWeights {
    pub fn new(corners: [Point2; 3], p: Point2) -> Self {
        let d = corners.map(|c| c.distance(p));
        if let Some(k) = (0..3).find(|&k| d[k] <= POINT_TOLERANCE) {
            return IdwWeights::Vertex(k);
        }
        IdwWeights::Weights(d.map(|x| 1.0 / x))
    }

    pub fn apply(&self, values: [f64; 3]) -> f64 {
        match *self {
            IdwWeights::Vertex(k) => values[k],
            IdwWeights::Weights(w) => {
                let num = w[0] * values[0] + w[1] * values[1] + w[2] * values[2];
                let mean = num / (w[0] + w[1] + w[2]);
                let lo = values[0].min(values[1]).min(values[2]);
                let hi = values[0].max(values[1]).max(values[2]);
                mean.clamp(lo, hi)
            }
        }
    }
}

/// Weighted mean of the corner values with weights `1 / |p - corner|`.
/// At a corner (within [`POINT_TOLERANCE`]) the corner value is returned
/// unchanged.
pub fn idw_interpolate(corners: [Point2; 3], values: [f64; 3], p: Point2) -> f64 {
    IdwWeights::new(corners, p).apply(values)
}
