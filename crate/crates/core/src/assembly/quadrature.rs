//! Quadrature rules on the reference triangle, reference square, and
//! reference edge.
//!
//! Assembly uses a 6-point degree-4 rule on triangles and 3x3 Gauss on
//! quadrilaterals; error integration uses a collapsed 5x5 rule on triangles
//! (degree 8, all weights positive) and 4x4 Gauss. Boundary facets use
//! 4-point Gauss. The integrands are smooth but not polynomial, so the
//! volume rules over-integrate relative to the element order on purpose.

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let a = 1.0 / 3.0_f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = (3.0 / 5.0_f64).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let a = 0.3399810435848563;
            let b = 0.8611363115940526;
            let wa = 0.6521451548625461;
            let wb = 0.3478548451374538;
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        5 => {
            let a = 0.5384693101056831;
            let b = 0.906179845938664;
            let wa = 0.4786286704993665;
            let wb = 0.2369268850561891;
            let w0 = 0.5688888888888889;
            (vec![-b, -a, 0.0, a, b], vec![wb, wa, w0, wa, wb])
        }
        _ => unreachable!("unsupported Gauss order {n}"),
    }
}

/// Quadrature on a two-dimensional reference cell.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Largest total polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    /// Six-point degree-4 rule on the reference triangle
    /// (-1,-1), (1,-1), (-1,1).
    pub fn triangle_degree4() -> Self {
        // Two symmetric orbits in barycentric coordinates; weights are
        // fractions of the reference area 2.
        let a = 0.445948490915965;
        let wa = 0.223381589678011;
        let b = 0.091576213509771;
        let wb = 0.109951743655322;
        let mut points = Vec::with_capacity(6);
        let mut weights = Vec::with_capacity(6);
        for (c, w) in [(a, wa), (b, wb)] {
            for bary in [
                [1.0 - 2.0 * c, c, c],
                [c, 1.0 - 2.0 * c, c],
                [c, c, 1.0 - 2.0 * c],
            ] {
                points.push(barycentric_to_reference(bary));
                weights.push(2.0 * w);
            }
        }
        Self { points, weights, degree: 4 }
    }

    /// Collapsed 5x5 Gauss rule on the reference triangle; exact through
    /// total degree 8 with positive weights.
    pub fn triangle_degree7() -> Self {
        let (gx, gw) = gauss_legendre(5);
        let mut points = Vec::with_capacity(25);
        let mut weights = Vec::with_capacity(25);
        for (s, ws) in gx.iter().zip(&gw) {
            for (t, wt) in gx.iter().zip(&gw) {
                // Map the square onto the unit simplex (xi, eta) and then
                // onto the reference triangle; the collapse contributes a
                // factor (1 - eta).
                let s01 = 0.5 * (s + 1.0);
                let t01 = 0.5 * (t + 1.0);
                let xi = s01 * (1.0 - t01);
                let eta = t01;
                points.push([2.0 * xi - 1.0, 2.0 * eta - 1.0]);
                weights.push(ws * wt * (1.0 - t01));
            }
        }
        Self { points, weights, degree: 7 }
    }

    /// Tensor-product Gauss rule on the reference square (-1,1)^2.
    pub fn quad_gauss(n: usize) -> Self {
        let (gx, gw) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (x, wx) in gx.iter().zip(&gw) {
            for (y, wy) in gx.iter().zip(&gw) {
                points.push([*x, *y]);
                weights.push(wx * wy);
            }
        }
        Self { points, weights, degree: 2 * n - 1 }
    }
}

/// Quadrature on the reference edge [-1, 1].
#[derive(Debug, Clone)]
pub struct EdgeQuadrature {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl EdgeQuadrature {
    pub fn gauss(n: usize) -> Self {
        let (points, weights) = gauss_legendre(n);
        Self { points, weights, degree: 2 * n - 1 }
    }
}

fn barycentric_to_reference(bary: [f64; 3]) -> [f64; 2] {
    // Vertices of the reference triangle.
    const V: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]];
    [
        bary[0] * V[0][0] + bary[1] * V[1][0] + bary[2] * V[2][0],
        bary[0] * V[0][1] + bary[1] * V[1][1] + bary[2] * V[2][1],
    ]
}
