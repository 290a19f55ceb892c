//! Shared test support: an independent dense brute-force assembler used as
//! the oracle for the sparse assembly path.
//!
//! The oracle loops over every global basis-function pair and integrates
//! with its own geometry code (hand-written barycentric / bilinear formulas
//! on the physical cells), instead of local matrices and scatter-add. Only
//! the quadrature tables and the regularized data callables are shared.

use nitsche_fem::assembly::{EdgeQuadrature, QuadratureRule};
use nitsche_fem::boundary::RegularizedProblem;
use nitsche_fem::geometry::Point2;
use nitsche_fem::mesh::{ElementKind, Mesh};
use nitsche_fem::solver::dense::DenseMatrix;

pub struct DenseSystem {
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
}

/// Value and gradient of the global hat function of node `node` on element
/// `e` at physical point `p`; zero when the node is not part of the element.
fn basis_on_element(mesh: &Mesh, e: usize, node: usize, p: Point2) -> (f64, [f64; 2]) {
    let conn = mesh.element(e);
    let Some(local) = conn.iter().position(|&n| n == node) else {
        return (0.0, [0.0, 0.0]);
    };
    let v: Vec<Point2> = mesh.element_coords(e);
    match mesh.kind() {
        ElementKind::P1Triangle => {
            // Barycentric coordinate of `local` via signed areas against the
            // opposite edge (a, b).
            let twice_area = (v[1] - v[0]).cross(v[2] - v[0]);
            let (a, b) = match local {
                0 => (v[1], v[2]),
                1 => (v[2], v[0]),
                _ => (v[0], v[1]),
            };
            let value = (b - a).cross(p - a) / twice_area;
            let grad = [(a.y - b.y) / twice_area, (b.x - a.x) / twice_area];
            (value, grad)
        }
        ElementKind::Q1Quad => {
            // Axis-aligned rectangles only (all the generator produces).
            let (x0, x1) = (v[0].x.min(v[2].x), v[0].x.max(v[2].x));
            let (y0, y1) = (v[0].y.min(v[2].y), v[0].y.max(v[2].y));
            let (w, h) = (x1 - x0, y1 - y0);
            let xi = (p.x - x0) / w;
            let eta = (p.y - y0) / h;
            let corner = v[local];
            let (fx, dfx) = if (corner.x - x0).abs() < (corner.x - x1).abs() {
                (1.0 - xi, -1.0 / w)
            } else {
                (xi, 1.0 / w)
            };
            let (fy, dfy) = if (corner.y - y0).abs() < (corner.y - y1).abs() {
                (1.0 - eta, -1.0 / h)
            } else {
                (eta, 1.0 / h)
            };
            (fx * fy, [dfx * fy, fx * dfy])
        }
    }
}

/// Physical quadrature points and weights of one element.
fn physical_rule(mesh: &Mesh, e: usize, rule: &QuadratureRule) -> Vec<(Point2, f64)> {
    let v = mesh.element_coords(e);
    match mesh.kind() {
        ElementKind::P1Triangle => {
            let area = 0.5 * (v[1] - v[0]).cross(v[2] - v[0]);
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(pt, w)| {
                    let l1 = (1.0 + pt[0]) / 2.0;
                    let l2 = (1.0 + pt[1]) / 2.0;
                    let l0 = 1.0 - l1 - l2;
                    let p = Point2::new(
                        l0 * v[0].x + l1 * v[1].x + l2 * v[2].x,
                        l0 * v[0].y + l1 * v[1].y + l2 * v[2].y,
                    );
                    // Reference area 2 maps to the element area.
                    (p, w * area / 2.0)
                })
                .collect()
        }
        ElementKind::Q1Quad => {
            let (x0, x1) = (v[0].x.min(v[2].x), v[0].x.max(v[2].x));
            let (y0, y1) = (v[0].y.min(v[2].y), v[0].y.max(v[2].y));
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(pt, w)| {
                    let p = Point2::new(
                        x0 + (x1 - x0) * (1.0 + pt[0]) / 2.0,
                        y0 + (y1 - y0) * (1.0 + pt[1]) / 2.0,
                    );
                    (p, w * (x1 - x0) * (y1 - y0) / 4.0)
                })
                .collect()
        }
    }
}

/// Dense assembly by a direct loop over all basis-function pairs.
pub fn brute_force_system(
    mesh: &Mesh,
    problem: &RegularizedProblem,
    gamma: f64,
) -> DenseSystem {
    let n = mesh.num_nodes();
    let vol_rule = match mesh.kind() {
        ElementKind::P1Triangle => QuadratureRule::triangle_degree4(),
        ElementKind::Q1Quad => QuadratureRule::quad_gauss(3),
    };
    let edge_rule = EdgeQuadrature::gauss(4);
    let q = gamma / mesh.mesh_size();
    let domain = problem.domain();

    let mut matrix = DenseMatrix::zeros(n);
    let mut rhs = vec![0.0; n];

    for a in 0..n {
        for b in 0..n {
            let mut acc = 0.0;
            for e in 0..mesh.num_elements() {
                for (p, w) in physical_rule(mesh, e, &vol_rule) {
                    let (va, ga) = basis_on_element(mesh, e, a, p);
                    let (vb, gb) = basis_on_element(mesh, e, b, p);
                    let mu = problem.reaction(p);
                    acc += w * (ga[0] * gb[0] + ga[1] * gb[1] + mu * va * vb);
                }
            }
            for facet in mesh.boundary_facets() {
                let pa = mesh.node(facet.nodes[0]);
                let pb = mesh.node(facet.nodes[1]);
                let half = (pb - pa).scale(0.5);
                let len_half = half.norm();
                for (t, w) in edge_rule.points.iter().zip(&edge_rule.weights) {
                    let p = Point2::new(
                        0.5 * (pa.x + pb.x) + t * half.x,
                        0.5 * (pa.y + pb.y) + t * half.y,
                    );
                    let (va, ga) = basis_on_element(mesh, facet.element, a, p);
                    let (vb, gb) = basis_on_element(mesh, facet.element, b, p);
                    let dna = ga[0] * facet.normal.x + ga[1] * facet.normal.y;
                    let dnb = gb[0] * facet.normal.x + gb[1] * facet.normal.y;
                    acc += w * len_half * (-va * dnb - vb * dna + q * va * vb);
                }
            }
            matrix[(a, b)] = acc;
        }

        let mut load = 0.0;
        for e in 0..mesh.num_elements() {
            for (p, w) in physical_rule(mesh, e, &vol_rule) {
                let (va, _) = basis_on_element(mesh, e, a, p);
                load += w * problem.f_hat(p) * va;
            }
        }
        for facet in mesh.boundary_facets() {
            let pa = mesh.node(facet.nodes[0]);
            let pb = mesh.node(facet.nodes[1]);
            let half = (pb - pa).scale(0.5);
            let seg = domain.segment(facet.segment);
            for (t, w) in edge_rule.points.iter().zip(&edge_rule.weights) {
                let p = Point2::new(
                    0.5 * (pa.x + pb.x) + t * half.x,
                    0.5 * (pa.y + pb.y) + t * half.y,
                );
                let (va, ga) = basis_on_element(mesh, facet.element, a, p);
                let dna = ga[0] * facet.normal.x + ga[1] * facet.normal.y;
                let g = problem.g_hat(facet.segment, (p - seg.start).dot(seg.tangent));
                load += w * half.norm() * g * (-dna + q * va);
            }
        }
        rhs[a] = load;
    }

    DenseSystem { matrix, rhs }
}
