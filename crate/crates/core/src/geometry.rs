//! Convex polygonal domains with a marked boundary decomposition.
//!
//! The boundary is split into open straight segments by an ordered set of
//! marker points (the locations where Dirichlet data may jump, plus every
//! polygon vertex). Each marker carries the interior angle and a local
//! polar frame whose zero direction lies along the outgoing segment.

use crate::{FemError, Result};

/// Snap tolerance for interior angles that are numerically straight.
const ANGLE_SNAP: f64 = 1.0e-9;

/// A point in the plane; also used for direction vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product `self x other`.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(s * self.x, s * self.y)
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self::new(self.x / n, self.y / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// One open boundary segment between consecutive marker points.
#[derive(Debug, Clone, Copy)]
pub struct BoundarySegment {
    pub start: Point2,
    pub end: Point2,
    pub length: f64,
    /// Unit tangent in counter-clockwise direction.
    pub tangent: Point2,
    /// Unit outward normal.
    pub normal: Point2,
}

impl BoundarySegment {
    fn new(start: Point2, end: Point2) -> Self {
        let length = start.distance(end);
        let tangent = (end - start).scale(1.0 / length);
        // Outward normal of a counter-clockwise boundary points right of the tangent.
        let normal = Point2::new(tangent.y, -tangent.x);
        Self { start, end, length, tangent, normal }
    }

    /// Point at affine parameter `t` in `[0, 1]`.
    pub fn point_at(&self, t: f64) -> Point2 {
        Point2::new(
            self.start.x + t * (self.end.x - self.start.x),
            self.start.y + t * (self.end.y - self.start.y),
        )
    }

    /// Point at arc length `s` in `[0, length]` from the segment start.
    pub fn point_at_arclength(&self, s: f64) -> Point2 {
        self.start + self.tangent.scale(s)
    }
}

/// Local polar coordinates at a marker point: `theta = 0` along the
/// outgoing segment, increasing counter-clockwise up to the interior angle
/// on the incoming segment.
#[derive(Debug, Clone, Copy)]
pub struct PolarFrame {
    pub origin: Point2,
    /// Unit direction of the outgoing boundary segment.
    pub zero_direction: Point2,
    /// Interior angle at the origin.
    pub omega: f64,
}

impl PolarFrame {
    /// Converts `p` to local polar coordinates `(r, theta)`.
    ///
    /// For points in the closed interior wedge the angle lies in
    /// `[0, omega]`; the origin itself maps to `(0, 0)` by convention.
    pub fn to_polar(&self, p: Point2) -> (f64, f64) {
        let v = p - self.origin;
        let r = v.norm();
        if r == 0.0 {
            return (0.0, 0.0);
        }
        let mut theta = self.zero_direction.cross(v).atan2(self.zero_direction.dot(v));
        if theta < 0.0 {
            // atan2 range is (-pi, pi]; fold onto [0, 2*pi) so the interior
            // wedge of a straight marker (omega = pi) stays nonnegative.
            theta = if theta > -1.0e-12 { 0.0 } else { theta + 2.0 * std::f64::consts::PI };
        }
        if theta > self.omega && theta < self.omega + 1.0e-9 {
            theta = self.omega;
        }
        (r, theta)
    }

    /// Inverse of [`to_polar`](Self::to_polar).
    pub fn from_polar(&self, r: f64, theta: f64) -> Point2 {
        let (sin, cos) = theta.sin_cos();
        let d = self.zero_direction;
        // Rotate the zero direction by theta and scale by r.
        Point2::new(
            self.origin.x + r * (cos * d.x - sin * d.y),
            self.origin.y + r * (sin * d.x + cos * d.y),
        )
    }
}

/// A bounded convex polygon whose boundary is decomposed at an ordered set
/// of marker points (all polygon vertices plus any declared mid-edge
/// discontinuity locations).
#[derive(Debug, Clone)]
pub struct PolygonDomain {
    vertices: Vec<Point2>,
    markers: Vec<Point2>,
    segments: Vec<BoundarySegment>,
    angles: Vec<f64>,
    area: f64,
    centroid: Point2,
    diameter: f64,
}

impl PolygonDomain {
    /// Builds a domain from its corner `vertices` (strictly counter-clockwise)
    /// and the full ordered marker list `discontinuity_points`, which must
    /// contain every vertex and may add points interior to straight edges.
    pub fn new(vertices: Vec<Point2>, discontinuity_points: Vec<Point2>) -> Result<Self> {
        let inv = |msg: String| FemError::InvalidDomain(msg);
        if vertices.len() < 3 {
            return Err(inv(format!("need at least 3 vertices, got {}", vertices.len())));
        }
        for p in vertices.iter().chain(discontinuity_points.iter()) {
            if !p.is_finite() {
                return Err(inv("non-finite coordinate".into()));
            }
        }

        let n = vertices.len();
        let area = polygon_area(&vertices);
        if area <= 0.0 {
            return Err(inv(format!(
                "vertices must be in counter-clockwise order (signed area {area:.3e})"
            )));
        }
        // Strict convexity at every vertex.
        for i in 0..n {
            let prev = vertices[(i + n - 1) % n];
            let cur = vertices[i];
            let next = vertices[(i + 1) % n];
            if (cur - prev).cross(next - cur) <= 0.0 {
                return Err(inv(format!("polygon is not strictly convex at vertex {i}")));
            }
        }

        let diameter = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| vertices[i].distance(vertices[j]))
            .fold(0.0_f64, f64::max);
        let tol = 1.0e-10 * diameter;

        let markers = discontinuity_points;
        if markers.is_empty() {
            return Err(inv("marker list must not be empty".into()));
        }
        for (i, a) in markers.iter().enumerate() {
            for b in markers.iter().skip(i + 1) {
                if a.distance(*b) <= tol {
                    return Err(inv(format!("duplicate marker point ({}, {})", a.x, a.y)));
                }
            }
        }
        for v in &vertices {
            if !markers.iter().any(|m| m.distance(*v) <= tol) {
                return Err(inv(format!("vertex ({}, {}) missing from marker list", v.x, v.y)));
            }
        }

        // Position of every marker along the boundary, as cumulative arc length.
        let mut perimeter = 0.0;
        let mut edge_offsets = Vec::with_capacity(n);
        for i in 0..n {
            edge_offsets.push(perimeter);
            perimeter += vertices[i].distance(vertices[(i + 1) % n]);
        }
        let mut positions = Vec::with_capacity(markers.len());
        for m in &markers {
            let (edge, t, dist) = project_to_polygon(&vertices, *m);
            if dist > tol {
                return Err(inv(format!(
                    "marker ({}, {}) is not on the boundary (distance {dist:.3e})",
                    m.x, m.y
                )));
            }
            let edge_len = vertices[edge].distance(vertices[(edge + 1) % n]);
            positions.push(edge_offsets[edge] + t * edge_len);
        }
        // Counter-clockwise ordering up to a cyclic shift.
        let first = positions
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let m = markers.len();
        for k in 0..m - 1 {
            let a = positions[(first + k) % m];
            let b = positions[(first + k + 1) % m];
            if b <= a {
                return Err(inv(
                    "marker points must be ordered counter-clockwise along the boundary".into(),
                ));
            }
        }

        let segments: Vec<BoundarySegment> = (0..m)
            .map(|i| BoundarySegment::new(markers[i], markers[(i + 1) % m]))
            .collect();

        let mut angles = Vec::with_capacity(m);
        for i in 0..m {
            let outgoing = segments[i].tangent;
            let incoming_rev = segments[(i + m - 1) % m].tangent.scale(-1.0);
            let mut omega = outgoing.cross(incoming_rev).atan2(outgoing.dot(incoming_rev));
            if omega <= 0.0 {
                omega += 2.0 * std::f64::consts::PI;
            }
            if (omega - std::f64::consts::PI).abs() < ANGLE_SNAP {
                omega = std::f64::consts::PI;
            }
            if omega > std::f64::consts::PI {
                return Err(inv(format!(
                    "interior angle {omega:.6} at marker {i} exceeds pi; \
                     reentrant corners are not supported"
                )));
            }
            angles.push(omega);
        }

        let centroid = polygon_centroid(&vertices, area);
        Ok(Self { vertices, markers, segments, angles, area, centroid, diameter })
    }

    /// Convenience constructor: the markers are exactly the vertices.
    pub fn from_vertices(vertices: Vec<Point2>) -> Result<Self> {
        let markers = vertices.clone();
        Self::new(vertices, markers)
    }

    /// Axis-aligned rectangle `(x0, x1) x (y0, y1)` with extra boundary
    /// markers merged into the corner list in counter-clockwise order.
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, extra: &[Point2]) -> Result<Self> {
        let corners = vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ];
        let mut markers = corners.clone();
        markers.extend_from_slice(extra);
        let pos = |p: Point2| -> f64 {
            let (edge, t, _) = project_to_polygon(&corners, p);
            let offsets = [
                0.0,
                x1 - x0,
                (x1 - x0) + (y1 - y0),
                2.0 * (x1 - x0) + (y1 - y0),
            ];
            let lens = [x1 - x0, y1 - y0, x1 - x0, y1 - y0];
            offsets[edge] + t * lens[edge]
        };
        markers.sort_by(|a, b| pos(*a).total_cmp(&pos(*b)));
        Self::new(corners, markers)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    /// The ordered marker points `A_i`.
    pub fn discontinuity_points(&self) -> &[Point2] {
        &self.markers
    }

    /// Number of boundary segments (equals the number of markers).
    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    pub fn segment(&self, i: usize) -> &BoundarySegment {
        &self.segments[i]
    }

    pub fn segments(&self) -> &[BoundarySegment] {
        &self.segments
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn centroid(&self) -> Point2 {
        self.centroid
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Interior angle at marker `i`; exactly `pi` for mid-edge markers.
    pub fn interior_angle(&self, i: usize) -> Result<f64> {
        self.angles
            .get(i)
            .copied()
            .ok_or(FemError::IndexOutOfRange { index: i, len: self.angles.len() })
    }

    /// Polar frame at marker `i`, zero direction along the outgoing segment.
    pub fn polar_frame(&self, i: usize) -> Result<PolarFrame> {
        let omega = self.interior_angle(i)?;
        Ok(PolarFrame {
            origin: self.markers[i],
            zero_direction: self.segments[i].tangent,
            omega,
        })
    }

    /// Default tolerance for boundary queries.
    pub fn boundary_tolerance(&self) -> f64 {
        1.0e-10 * self.diameter
    }

    /// Locates `p` on the boundary: returns the segment index and the affine
    /// parameter `t` in `[0, 1]` along it. At a shared endpoint the outgoing
    /// segment wins (`t = 0`).
    pub fn locate_on_boundary(&self, p: Point2, tol: Option<f64>) -> Result<(usize, f64)> {
        let tol = tol.unwrap_or_else(|| self.boundary_tolerance());
        let mut best: Option<(usize, f64, f64)> = None;
        for (i, seg) in self.segments.iter().enumerate() {
            let v = p - seg.start;
            let t = (v.dot(seg.tangent) / seg.length).clamp(0.0, 1.0);
            let d = p.distance(seg.point_at(t));
            if d <= tol {
                let better = match best {
                    None => true,
                    // Prefer the smaller parameter, so an endpoint resolves
                    // to the outgoing segment with t = 0.
                    Some((_, bt, bd)) => d < bd - tol || (d <= bd + tol && t < bt),
                };
                if better {
                    best = Some((i, t, d));
                }
            }
        }
        best.map(|(i, t, _)| (i, t))
            .ok_or(FemError::NotOnBoundary { x: p.x, y: p.y, tol })
    }

    /// Returns `(min, max)` corners when the vertex polygon is an
    /// axis-aligned rectangle.
    pub fn as_axis_aligned_rectangle(&self) -> Option<(Point2, Point2)> {
        if self.vertices.len() != 4 {
            return None;
        }
        let xs: Vec<f64> = self.vertices.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = self.vertices.iter().map(|p| p.y).collect();
        let (x0, x1) = (xs.iter().copied().fold(f64::MAX, f64::min), xs.iter().copied().fold(f64::MIN, f64::max));
        let (y0, y1) = (ys.iter().copied().fold(f64::MAX, f64::min), ys.iter().copied().fold(f64::MIN, f64::max));
        let tol = self.boundary_tolerance();
        for p in &self.vertices {
            let on_x = (p.x - x0).abs() <= tol || (p.x - x1).abs() <= tol;
            let on_y = (p.y - y0).abs() <= tol || (p.y - y1).abs() <= tol;
            if !(on_x && on_y) {
                return None;
            }
        }
        Some((Point2::new(x0, y0), Point2::new(x1, y1)))
    }
}

fn polygon_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    let mut twice = 0.0;
    for i in 0..n {
        twice += vertices[i].cross(vertices[(i + 1) % n]);
    }
    0.5 * twice
}

fn polygon_centroid(vertices: &[Point2], area: f64) -> Point2 {
    let n = vertices.len();
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let w = a.cross(b);
        cx += (a.x + b.x) * w;
        cy += (a.y + b.y) * w;
    }
    Point2::new(cx / (6.0 * area), cy / (6.0 * area))
}

/// Projects `p` onto the closed vertex polygon boundary; returns
/// `(edge index, parameter, distance)`.
fn project_to_polygon(vertices: &[Point2], p: Point2) -> (usize, f64, f64) {
    let n = vertices.len();
    let mut best = (0, 0.0, f64::MAX);
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let e = b - a;
        let len2 = e.dot(e);
        let t = ((p - a).dot(e) / len2).clamp(0.0, 1.0);
        let q = Point2::new(a.x + t * e.x, a.y + t * e.y);
        let d = p.distance(q);
        if d < best.2 {
            best = (i, t, d);
        }
    }
    best
}
