//! Assembly of the Nitsche bilinear form and load functional into a sparse
//! symmetric system.
//!
//! Volume terms: grad w . grad v + mu w v and f_hat v. Boundary terms on
//! every boundary facet: the two symmetric consistency terms
//! -v (grad w . n) - w (grad v . n), the penalty (gamma/h) w v, and the
//! matching data terms -g_hat (grad v . n) + (gamma/h) g_hat v. The penalty
//! scales with the global mesh size, and element contributions are merged
//! in element order so assembly is bitwise reproducible.

mod quadrature;
mod sparse;

pub use quadrature::{EdgeQuadrature, QuadratureRule};
pub use sparse::{CsrMatrix, SparseSystem};

use crate::boundary::RegularizedProblem;
use crate::geometry::Point2;
use crate::mesh::{ElementKind, Mesh, ReferenceCell};
use crate::parallel::par_map;
use crate::{FemError, Result};

/// Dense local matrix over the basis functions of one cell.
#[derive(Debug, Clone, Copy)]
pub struct LocalMatrix {
    pub n: usize,
    pub a: [[f64; 4]; 4],
}

impl LocalMatrix {
    fn zeros(n: usize) -> Self {
        Self { n, a: [[0.0; 4]; 4] }
    }
}

/// Geometry of one mapped cell at a reference point: physical point,
/// Jacobian determinant, and physical shape-function gradients.
pub(crate) struct MappedPoint {
    pub(crate) point: Point2,
    pub(crate) det_j: f64,
    pub(crate) grads: [[f64; 2]; 4],
}

pub(crate) fn map_point(cell: ReferenceCell, coords: &[Point2], xhat: f64, yhat: f64) -> MappedPoint {
    let n = cell.num_nodes();
    let values = cell.shape_values(xhat, yhat);
    let ref_grads = cell.shape_gradients(xhat, yhat);
    let mut point = Point2::new(0.0, 0.0);
    let mut j = [[0.0_f64; 2]; 2];
    for a in 0..n {
        point.x += values[a] * coords[a].x;
        point.y += values[a] * coords[a].y;
        j[0][0] += coords[a].x * ref_grads[a][0];
        j[0][1] += coords[a].x * ref_grads[a][1];
        j[1][0] += coords[a].y * ref_grads[a][0];
        j[1][1] += coords[a].y * ref_grads[a][1];
    }
    let det_j = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    // grad phi = J^{-T} grad_ref phi
    let inv_t = [
        [j[1][1] / det_j, -j[1][0] / det_j],
        [-j[0][1] / det_j, j[0][0] / det_j],
    ];
    let mut grads = [[0.0; 2]; 4];
    for a in 0..n {
        grads[a][0] = inv_t[0][0] * ref_grads[a][0] + inv_t[0][1] * ref_grads[a][1];
        grads[a][1] = inv_t[1][0] * ref_grads[a][0] + inv_t[1][1] * ref_grads[a][1];
    }
    MappedPoint { point, det_j, grads }
}

/// Reference coordinates of a physical point inside an affinely mapped cell.
pub(crate) fn reference_coords(cell: ReferenceCell, coords: &[Point2], p: Point2) -> [f64; 2] {
    let (e1, e2) = match cell.kind {
        ElementKind::P1Triangle => (coords[1] - coords[0], coords[2] - coords[0]),
        ElementKind::Q1Quad => (coords[1] - coords[0], coords[3] - coords[0]),
    };
    let rhs = p - coords[0];
    let det = e1.cross(e2);
    // Cramer's rule for [e1 e2] (u, v)^T = rhs.
    let u = (rhs.x * e2.y - rhs.y * e2.x) / det;
    let v = (e1.x * rhs.y - e1.y * rhs.x) / det;
    [2.0 * u - 1.0, 2.0 * v - 1.0]
}

/// Local stiffness matrix: integrals of grad phi_a . grad phi_b.
pub fn local_stiffness(kind: ElementKind, coords: &[Point2], rule: &QuadratureRule) -> LocalMatrix {
    let cell = ReferenceCell::new(kind);
    let n = cell.num_nodes();
    let mut local = LocalMatrix::zeros(n);
    for (pt, w) in rule.points.iter().zip(&rule.weights) {
        let m = map_point(cell, coords, pt[0], pt[1]);
        debug_assert!(m.det_j > 0.0, "degenerate cell");
        for a in 0..n {
            for b in 0..n {
                local.a[a][b] +=
                    w * m.det_j * (m.grads[a][0] * m.grads[b][0] + m.grads[a][1] * m.grads[b][1]);
            }
        }
    }
    local
}

/// Local reaction mass matrix: integrals of mu phi_a phi_b.
pub fn local_mass(
    kind: ElementKind,
    coords: &[Point2],
    mu: impl Fn(Point2) -> f64,
    rule: &QuadratureRule,
) -> LocalMatrix {
    let cell = ReferenceCell::new(kind);
    let n = cell.num_nodes();
    let mut local = LocalMatrix::zeros(n);
    for (pt, w) in rule.points.iter().zip(&rule.weights) {
        let values = cell.shape_values(pt[0], pt[1]);
        let m = map_point(cell, coords, pt[0], pt[1]);
        debug_assert!(m.det_j > 0.0, "degenerate cell");
        let scale = w * m.det_j * mu(m.point);
        for a in 0..n {
            for b in 0..n {
                local.a[a][b] += scale * values[a] * values[b];
            }
        }
    }
    local
}

/// Local volume load: integrals of f_hat phi_a.
pub fn local_load(
    kind: ElementKind,
    coords: &[Point2],
    f_hat: impl Fn(Point2) -> f64,
    rule: &QuadratureRule,
) -> [f64; 4] {
    let cell = ReferenceCell::new(kind);
    let n = cell.num_nodes();
    let mut load = [0.0; 4];
    for (pt, w) in rule.points.iter().zip(&rule.weights) {
        let values = cell.shape_values(pt[0], pt[1]);
        let m = map_point(cell, coords, pt[0], pt[1]);
        let scale = w * m.det_j * f_hat(m.point);
        for a in 0..n {
            load[a] += scale * values[a];
        }
    }
    load
}

/// Boundary-facet matrix contribution: both consistency terms plus the
/// penalty, coupling every basis function of the parent cell (off-facet
/// traces vanish, off-facet normal derivatives do not).
pub fn local_nitsche_facet(
    kind: ElementKind,
    coords: &[Point2],
    facet: [Point2; 2],
    normal: Point2,
    gamma_over_h: f64,
    rule: &EdgeQuadrature,
) -> LocalMatrix {
    let cell = ReferenceCell::new(kind);
    let n = cell.num_nodes();
    let mut local = LocalMatrix::zeros(n);
    let half = (facet[1] - facet[0]).scale(0.5);
    let jac = half.norm();
    let midpoint = Point2::new(
        0.5 * (facet[0].x + facet[1].x),
        0.5 * (facet[0].y + facet[1].y),
    );
    for (t, w) in rule.points.iter().zip(&rule.weights) {
        let p = midpoint + half.scale(*t);
        let [xhat, yhat] = reference_coords(cell, coords, p);
        let values = cell.shape_values(xhat, yhat);
        let m = map_point(cell, coords, xhat, yhat);
        let ws = w * jac;
        for a in 0..n {
            let dn_a = m.grads[a][0] * normal.x + m.grads[a][1] * normal.y;
            for b in 0..n {
                let dn_b = m.grads[b][0] * normal.x + m.grads[b][1] * normal.y;
                local.a[a][b] += ws
                    * (-values[a] * dn_b - values[b] * dn_a
                        + gamma_over_h * values[a] * values[b]);
            }
        }
    }
    local
}

/// Boundary-facet load contribution: -g_hat (grad phi_a . n) plus the
/// penalty term (gamma/h) g_hat phi_a, with g_hat given as a function of the
/// physical point.
pub fn local_facet_load(
    kind: ElementKind,
    coords: &[Point2],
    facet: [Point2; 2],
    normal: Point2,
    g_hat: impl Fn(Point2) -> f64,
    gamma_over_h: f64,
    rule: &EdgeQuadrature,
) -> [f64; 4] {
    let cell = ReferenceCell::new(kind);
    let n = cell.num_nodes();
    let mut load = [0.0; 4];
    let half = (facet[1] - facet[0]).scale(0.5);
    let jac = half.norm();
    let midpoint = Point2::new(
        0.5 * (facet[0].x + facet[1].x),
        0.5 * (facet[0].y + facet[1].y),
    );
    for (t, w) in rule.points.iter().zip(&rule.weights) {
        let p = midpoint + half.scale(*t);
        let [xhat, yhat] = reference_coords(cell, coords, p);
        let values = cell.shape_values(xhat, yhat);
        let m = map_point(cell, coords, xhat, yhat);
        let g = g_hat(p);
        let ws = w * jac;
        for a in 0..n {
            let dn_a = m.grads[a][0] * normal.x + m.grads[a][1] * normal.y;
            load[a] += ws * g * (-dn_a + gamma_over_h * values[a]);
        }
    }
    load
}

/// Volume quadrature used for assembly of the given element family.
pub fn assembly_rule(kind: ElementKind) -> QuadratureRule {
    match kind {
        ElementKind::P1Triangle => QuadratureRule::triangle_degree4(),
        ElementKind::Q1Quad => QuadratureRule::quad_gauss(3),
    }
}

/// Higher-degree volume quadrature used for error integration.
pub fn error_rule(kind: ElementKind) -> QuadratureRule {
    match kind {
        ElementKind::P1Triangle => QuadratureRule::triangle_degree7(),
        ElementKind::Q1Quad => QuadratureRule::quad_gauss(4),
    }
}

/// Assembles the global Nitsche system for the regularized problem.
pub fn assemble(mesh: &Mesh, problem: &RegularizedProblem, gamma: f64) -> Result<SparseSystem> {
    if gamma <= 0.0 {
        return Err(FemError::Assembly(format!("penalty gamma must be positive, got {gamma}")));
    }
    let domain = problem.domain();
    if domain.num_segments() != mesh.domain().num_segments()
        || domain
            .discontinuity_points()
            .iter()
            .zip(mesh.domain().discontinuity_points())
            .any(|(a, b)| a.distance(*b) > mesh.domain().boundary_tolerance())
    {
        return Err(FemError::Assembly(
            "mesh and regularized problem describe different domains".into(),
        ));
    }

    let kind = mesh.kind();
    let npe = kind.nodes_per_element();
    let n = mesh.num_nodes();
    let vol_rule = assembly_rule(kind);
    let edge_rule = EdgeQuadrature::gauss(4);
    let gamma_over_h = gamma / mesh.mesh_size();

    // Element-local work is pure; compute in parallel, merge in element order.
    let locals = par_map(mesh.num_elements(), |e| {
        let coords = mesh.element_coords(e);
        debug_assert!(quadrature_avoids_singularities(kind, &coords, &vol_rule, problem));
        let stiff = local_stiffness(kind, &coords, &vol_rule);
        let mass = local_mass(kind, &coords, |p| problem.reaction(p), &vol_rule);
        let load = local_load(kind, &coords, |p| problem.f_hat(p), &vol_rule);
        (stiff, mass, load)
    });

    let mut triplets = Vec::with_capacity(mesh.num_elements() * npe * npe + 64);
    let mut rhs = vec![0.0; n];
    for (e, (stiff, mass, load)) in locals.iter().enumerate() {
        let conn = mesh.element(e);
        for a in 0..npe {
            rhs[conn[a]] += load[a];
            for b in 0..npe {
                triplets.push((conn[a], conn[b], stiff.a[a][b] + mass.a[a][b]));
            }
        }
    }

    for facet in mesh.boundary_facets() {
        if facet.segment >= domain.num_segments() {
            return Err(FemError::Assembly(format!(
                "boundary facet ({}, {}) carries segment tag {} out of range",
                facet.nodes[0], facet.nodes[1], facet.segment
            )));
        }
        let conn = mesh.element(facet.element);
        let coords = mesh.element_coords(facet.element);
        let pts = [mesh.node(facet.nodes[0]), mesh.node(facet.nodes[1])];
        let seg = domain.segment(facet.segment);
        let local =
            local_nitsche_facet(kind, &coords, pts, facet.normal, gamma_over_h, &edge_rule);
        let load = local_facet_load(
            kind,
            &coords,
            pts,
            facet.normal,
            |p| problem.g_hat(facet.segment, (p - seg.start).dot(seg.tangent)),
            gamma_over_h,
            &edge_rule,
        );
        for a in 0..npe {
            rhs[conn[a]] += load[a];
            for b in 0..npe {
                triplets.push((conn[a], conn[b], local.a[a][b]));
            }
        }
    }

    Ok(SparseSystem { matrix: CsrMatrix::from_triplets(n, triplets), rhs })
}

/// Debug check: no volume quadrature point may sit on top of a singular
/// marker, where the split functions have no value.
fn quadrature_avoids_singularities(
    kind: ElementKind,
    coords: &[Point2],
    rule: &QuadratureRule,
    problem: &RegularizedProblem,
) -> bool {
    let cell = ReferenceCell::new(kind);
    rule.points.iter().all(|pt| {
        let m = map_point(cell, coords, pt[0], pt[1]);
        problem
            .singular_parts()
            .iter()
            .all(|s| s.origin().distance(m.point) > 1.0e-14)
    })
}
