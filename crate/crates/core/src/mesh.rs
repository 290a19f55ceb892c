//! Conforming structured meshes of rectangular domains with uniform
//! refinement and boundary-segment tags.
//!
//! Generation covers axis-aligned rectangles (the shape the experiments
//! need): a regular grid of cells, each either one Q1 quadrilateral or two
//! P1 triangles split along the (+1,+1) diagonal. Every boundary marker
//! must land on a grid node, so no boundary facet ever straddles a marker.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::geometry::{Point2, PolygonDomain};
use crate::{FemError, Result};

/// Element family of a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    /// Affine triangles with linear shape functions.
    P1Triangle,
    /// Parallelogram quadrilaterals with bilinear shape functions.
    Q1Quad,
}

impl ElementKind {
    pub fn nodes_per_element(self) -> usize {
        match self {
            ElementKind::P1Triangle => 3,
            ElementKind::Q1Quad => 4,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" | "triangle" | "tri" => Ok(ElementKind::P1Triangle),
            "q1" | "quad" => Ok(ElementKind::Q1Quad),
            other => Err(FemError::InvalidConfig(format!(
                "unknown element kind '{other}' (expected p1 or q1)"
            ))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ElementKind::P1Triangle => "p1",
            ElementKind::Q1Quad => "q1",
        }
    }
}

/// Reference cell with shape functions and reference gradients.
///
/// The reference triangle has vertices (-1,-1), (1,-1), (-1,1); the
/// reference square is (-1,1)^2 with counter-clockwise vertex order.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceCell {
    pub kind: ElementKind,
}

impl ReferenceCell {
    pub fn new(kind: ElementKind) -> Self {
        Self { kind }
    }

    pub fn num_nodes(self) -> usize {
        self.kind.nodes_per_element()
    }

    pub fn vertices(self) -> &'static [[f64; 2]] {
        match self.kind {
            ElementKind::P1Triangle => &[[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]],
            ElementKind::Q1Quad => &[[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]],
        }
    }

    /// Reference area (2 for the triangle, 4 for the square).
    pub fn measure(self) -> f64 {
        match self.kind {
            ElementKind::P1Triangle => 2.0,
            ElementKind::Q1Quad => 4.0,
        }
    }

    /// Shape function values at a reference point; unused slots are zero.
    pub fn shape_values(self, x: f64, y: f64) -> [f64; 4] {
        match self.kind {
            ElementKind::P1Triangle => [-(x + y) / 2.0, (1.0 + x) / 2.0, (1.0 + y) / 2.0, 0.0],
            ElementKind::Q1Quad => [
                (1.0 - x) * (1.0 - y) / 4.0,
                (1.0 + x) * (1.0 - y) / 4.0,
                (1.0 + x) * (1.0 + y) / 4.0,
                (1.0 - x) * (1.0 + y) / 4.0,
            ],
        }
    }

    /// Reference gradients of the shape functions at a reference point.
    pub fn shape_gradients(self, x: f64, y: f64) -> [[f64; 2]; 4] {
        match self.kind {
            ElementKind::P1Triangle => {
                let _ = (x, y);
                [[-0.5, -0.5], [0.5, 0.0], [0.0, 0.5], [0.0, 0.0]]
            }
            ElementKind::Q1Quad => [
                [-(1.0 - y) / 4.0, -(1.0 - x) / 4.0],
                [(1.0 - y) / 4.0, -(1.0 + x) / 4.0],
                [(1.0 + y) / 4.0, (1.0 + x) / 4.0],
                [-(1.0 + y) / 4.0, (1.0 - x) / 4.0],
            ],
        }
    }
}

/// A boundary facet: its two nodes in counter-clockwise order, the owning
/// element, the index of the boundary segment it lies on, and the outward
/// unit normal.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryFacet {
    pub nodes: [usize; 2],
    pub element: usize,
    pub segment: usize,
    pub normal: Point2,
}

/// Conforming mesh of a polygonal domain.
#[derive(Debug, Clone)]
pub struct Mesh {
    kind: ElementKind,
    nodes: Vec<Point2>,
    connectivity: Vec<usize>,
    boundary: Vec<BoundaryFacet>,
    h: f64,
    domain: PolygonDomain,
}

impl Mesh {
    /// Generates the initial structured mesh with `n0` subdivisions per unit
    /// length. The domain's vertex polygon must be an axis-aligned rectangle
    /// with integer `n0 * side` cell counts, and every boundary marker must
    /// fall on the resulting grid.
    pub fn generate_initial(domain: &PolygonDomain, kind: ElementKind, n0: u32) -> Result<Self> {
        if n0 == 0 {
            return Err(FemError::InvalidMesh("n0 must be at least 1".into()));
        }
        let (lo, hi) = domain.as_axis_aligned_rectangle().ok_or_else(|| {
            FemError::UnsupportedDomain(
                "initial mesh generation covers axis-aligned rectangles only".into(),
            )
        })?;
        let width = hi.x - lo.x;
        let height = hi.y - lo.y;
        let nx_f = width * n0 as f64;
        let ny_f = height * n0 as f64;
        let nx = nx_f.round() as usize;
        let ny = ny_f.round() as usize;
        if nx == 0 || ny == 0 || (nx_f - nx as f64).abs() > 1e-9 || (ny_f - ny as f64).abs() > 1e-9
        {
            return Err(FemError::UnsupportedDomain(format!(
                "side lengths {width} x {height} do not split into whole cells at {n0} per unit"
            )));
        }

        let node_id = |i: usize, j: usize| j * (nx + 1) + i;
        let coord = |i: usize, n: usize, a: f64, b: f64| a + (b - a) * (i as f64 / n as f64);
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push(Point2::new(coord(i, nx, lo.x, hi.x), coord(j, ny, lo.y, hi.y)));
            }
        }

        // Every marker must coincide with a grid node.
        let snap_tol = 1.0e-9 * domain.diameter();
        for a in domain.discontinuity_points() {
            let i = ((a.x - lo.x) / width * nx as f64).round() as usize;
            let j = ((a.y - lo.y) / height * ny as f64).round() as usize;
            let nearest = nodes[node_id(i.min(nx), j.min(ny))];
            if a.distance(nearest) > snap_tol {
                return Err(FemError::InvalidMesh(format!(
                    "boundary marker ({}, {}) is not representable on the coarse grid \
                     ({nx} x {ny} cells)",
                    a.x, a.y
                )));
            }
        }

        let mut connectivity = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let v00 = node_id(i, j);
                let v10 = node_id(i + 1, j);
                let v11 = node_id(i + 1, j + 1);
                let v01 = node_id(i, j + 1);
                match kind {
                    ElementKind::Q1Quad => connectivity.extend_from_slice(&[v00, v10, v11, v01]),
                    ElementKind::P1Triangle => {
                        // Split along the (+1,+1) diagonal of the cell.
                        connectivity.extend_from_slice(&[v00, v10, v11]);
                        connectivity.extend_from_slice(&[v00, v11, v01]);
                    }
                }
            }
        }

        Self::from_parts(kind, nodes, connectivity, domain.clone())
    }

    /// Assembles derived data (boundary facets, mesh size) and validates
    /// element orientation.
    fn from_parts(
        kind: ElementKind,
        nodes: Vec<Point2>,
        connectivity: Vec<usize>,
        domain: PolygonDomain,
    ) -> Result<Self> {
        let npe = kind.nodes_per_element();
        let num_elements = connectivity.len() / npe;

        let mut h = 0.0_f64;
        for e in 0..num_elements {
            let conn = &connectivity[e * npe..(e + 1) * npe];
            let pts: Vec<Point2> = conn.iter().map(|&n| nodes[n]).collect();
            if polygon_signed_area(&pts) <= 0.0 {
                return Err(FemError::InvalidMesh(format!(
                    "element {e} has nonpositive area (nodes not counter-clockwise)"
                )));
            }
            h = h.max(diameter_of(&pts));
        }

        // Facets that belong to exactly one element are on the boundary.
        let mut edge_count: HashMap<(usize, usize), u8> = HashMap::new();
        for e in 0..num_elements {
            let conn = &connectivity[e * npe..(e + 1) * npe];
            for k in 0..npe {
                let a = conn[k];
                let b = conn[(k + 1) % npe];
                *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut boundary = Vec::new();
        for e in 0..num_elements {
            let conn = &connectivity[e * npe..(e + 1) * npe];
            for k in 0..npe {
                let a = conn[k];
                let b = conn[(k + 1) % npe];
                if edge_count[&(a.min(b), a.max(b))] != 1 {
                    continue;
                }
                // Element orientation is counter-clockwise, so (a, b) runs
                // counter-clockwise along the boundary and the outward
                // normal is the tangent rotated clockwise.
                let t = (nodes[b] - nodes[a]).normalized();
                let normal = Point2::new(t.y, -t.x);
                let midpoint = Point2::new(
                    0.5 * (nodes[a].x + nodes[b].x),
                    0.5 * (nodes[a].y + nodes[b].y),
                );
                let (segment, _) = domain
                    .locate_on_boundary(midpoint, Some(1.0e-8 * domain.diameter()))
                    .map_err(|_| {
                        FemError::InvalidMesh(format!(
                            "boundary facet ({a}, {b}) has no boundary-segment tag"
                        ))
                    })?;
                boundary.push(BoundaryFacet { nodes: [a, b], element: e, segment, normal });
            }
        }

        Ok(Self { kind, nodes, connectivity, boundary, h, domain })
    }

    /// Splits every element into four congruent children via edge midpoints
    /// (plus the cell center for quadrilaterals). Structured meshes halve
    /// their mesh size exactly.
    pub fn refine_uniform(&self) -> Mesh {
        let npe = self.kind.nodes_per_element();
        let mut nodes = self.nodes.clone();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut connectivity = Vec::with_capacity(self.connectivity.len() * 4);

        let mut mid = |a: usize, b: usize, nodes: &mut Vec<Point2>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let p = Point2::new(
                    0.5 * (nodes[a].x + nodes[b].x),
                    0.5 * (nodes[a].y + nodes[b].y),
                );
                nodes.push(p);
                nodes.len() - 1
            })
        };

        for e in 0..self.num_elements() {
            let conn = &self.connectivity[e * npe..(e + 1) * npe];
            match self.kind {
                ElementKind::P1Triangle => {
                    let [v0, v1, v2] = [conn[0], conn[1], conn[2]];
                    let m01 = mid(v0, v1, &mut nodes);
                    let m12 = mid(v1, v2, &mut nodes);
                    let m02 = mid(v0, v2, &mut nodes);
                    connectivity.extend_from_slice(&[v0, m01, m02]);
                    connectivity.extend_from_slice(&[m01, v1, m12]);
                    connectivity.extend_from_slice(&[m02, m12, v2]);
                    connectivity.extend_from_slice(&[m01, m12, m02]);
                }
                ElementKind::Q1Quad => {
                    let [v0, v1, v2, v3] = [conn[0], conn[1], conn[2], conn[3]];
                    let m01 = mid(v0, v1, &mut nodes);
                    let m12 = mid(v1, v2, &mut nodes);
                    let m23 = mid(v2, v3, &mut nodes);
                    let m30 = mid(v3, v0, &mut nodes);
                    let center = Point2::new(
                        0.25 * (nodes[v0].x + nodes[v1].x + nodes[v2].x + nodes[v3].x),
                        0.25 * (nodes[v0].y + nodes[v1].y + nodes[v2].y + nodes[v3].y),
                    );
                    nodes.push(center);
                    let c = nodes.len() - 1;
                    connectivity.extend_from_slice(&[v0, m01, c, m30]);
                    connectivity.extend_from_slice(&[m01, v1, m12, c]);
                    connectivity.extend_from_slice(&[c, m12, v2, m23]);
                    connectivity.extend_from_slice(&[m30, c, m23, v3]);
                }
            }
        }

        Self::from_parts(self.kind, nodes, connectivity, self.domain.clone())
            .expect("refinement of a valid mesh is valid")
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn domain(&self) -> &PolygonDomain {
        &self.domain
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.connectivity.len() / self.kind.nodes_per_element()
    }

    pub fn node(&self, i: usize) -> Point2 {
        self.nodes[i]
    }

    pub fn nodes(&self) -> &[Point2] {
        &self.nodes
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let npe = self.kind.nodes_per_element();
        &self.connectivity[e * npe..(e + 1) * npe]
    }

    pub fn element_coords(&self, e: usize) -> Vec<Point2> {
        self.element(e).iter().map(|&n| self.nodes[n]).collect()
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary
    }

    /// Mesh size: the largest element diameter.
    pub fn mesh_size(&self) -> f64 {
        self.h
    }

    pub fn element_diameter(&self, e: usize) -> f64 {
        diameter_of(&self.element_coords(e))
    }

    /// Largest over smallest element diameter; a quasi-uniformity witness.
    pub fn diameter_ratio(&self) -> f64 {
        let mut min = f64::MAX;
        let mut max = 0.0_f64;
        for e in 0..self.num_elements() {
            let d = self.element_diameter(e);
            min = min.min(d);
            max = max.max(d);
        }
        max / min
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_elements())
            .map(|e| polygon_signed_area(&self.element_coords(e)))
            .sum()
    }

    /// Same mesh with node indices relabeled by `perm` (old index `i`
    /// becomes `perm[i]`); element order and local node order are kept.
    pub fn relabeled(&self, perm: &[usize]) -> Mesh {
        assert_eq!(perm.len(), self.nodes.len());
        let mut nodes = vec![Point2::new(0.0, 0.0); self.nodes.len()];
        for (old, &new) in perm.iter().enumerate() {
            nodes[new] = self.nodes[old];
        }
        let connectivity: Vec<usize> = self.connectivity.iter().map(|&n| perm[n]).collect();
        Self::from_parts(self.kind, nodes, connectivity, self.domain.clone())
            .expect("relabeling preserves validity")
    }

    /// Plain-text dump with one section per array; deterministic ordering.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "nodes {}", self.num_nodes());
        for (i, p) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "{i} {:.16e} {:.16e}", p.x, p.y);
        }
        let _ = writeln!(out, "elements {}", self.num_elements());
        for e in 0..self.num_elements() {
            let ids: Vec<String> = self.element(e).iter().map(|n| n.to_string()).collect();
            let _ = writeln!(out, "{e} {}", ids.join(" "));
        }
        let _ = writeln!(out, "boundary {}", self.boundary.len());
        for (i, f) in self.boundary.iter().enumerate() {
            let _ = writeln!(out, "{i} {} {} {}", f.nodes[0], f.nodes[1], f.segment);
        }
        out
    }
}

fn polygon_signed_area(pts: &[Point2]) -> f64 {
    let n = pts.len();
    let mut twice = 0.0;
    for i in 0..n {
        twice += pts[i].cross(pts[(i + 1) % n]);
    }
    0.5 * twice
}

fn diameter_of(pts: &[Point2]) -> f64 {
    let mut d = 0.0_f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max(pts[i].distance(pts[j]));
        }
    }
    d
}
