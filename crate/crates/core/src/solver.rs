//! Iterative solution of the assembled symmetric positive definite system,
//! plus small dense routines kept as independent oracles for tests.

use crate::assembly::SparseSystem;
use crate::{FemError, Result};

/// Outcome of a linear solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// True relative residual |b - A x| / |b|, recomputed by explicit
    /// multiplication after the iteration finished.
    pub relative_residual: f64,
    pub method: &'static str,
}

/// Solves `A x = b` by conjugate gradients with diagonal (Jacobi)
/// preconditioning. Deterministic: fixed summation order, no reordering.
///
/// The convergence contract is checked post hoc against the explicitly
/// recomputed residual, not the recurrence residual.
pub fn solve_spd(system: &SparseSystem, tol: f64, max_iter: usize) -> Result<SolveReport> {
    let a = &system.matrix;
    let b = &system.rhs;
    let n = a.nrows();
    assert!(tol > 0.0 && tol < 1.0, "tolerance must lie in (0, 1)");

    let diag = a.diagonal();
    if let Some(row) = diag.iter().position(|&d| d == 0.0) {
        return Err(FemError::ZeroDiagonal { row });
    }

    let norm_b = norm(b);
    if norm_b == 0.0 {
        return Ok(SolveReport {
            solution: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
            method: "jacobi-pcg",
        });
    }

    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for iter in 0..max_iter {
        if norm(&r) <= tol * norm_b {
            // The recurrence thinks we are done; accept only if the true
            // residual agrees, otherwise keep iterating on the exact one.
            a.matvec(&x, &mut ap);
            let exact: Vec<f64> = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
            let true_residual = norm(&exact) / norm_b;
            if true_residual <= tol {
                return Ok(SolveReport {
                    solution: x,
                    iterations: iter,
                    relative_residual: true_residual,
                    method: "jacobi-pcg",
                });
            }
            r = exact;
            z = r.iter().zip(&diag).map(|(ri, di)| ri / di).collect();
            p = z.clone();
            rz = dot(&r, &z);
        }

        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            // Curvature of the quadratic form is nonpositive along p: the
            // matrix is not positive definite.
            return Err(FemError::NoConvergence {
                max_iter: iter,
                residual: norm(&r) / norm_b,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    // Final acceptance check at the iteration cap.
    a.matvec(&x, &mut ap);
    let exact: Vec<f64> = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
    let true_residual = norm(&exact) / norm_b;
    if true_residual <= tol {
        return Ok(SolveReport {
            solution: x,
            iterations: max_iter,
            relative_residual: true_residual,
            method: "jacobi-pcg",
        });
    }
    Err(FemError::NoConvergence { max_iter, residual: true_residual })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Dense direct routines for small systems; test oracles only, never on the
/// main solve path.
pub mod dense {
    use crate::{FemError, Result};

    /// Row-major square dense matrix.
    #[derive(Debug, Clone, PartialEq)]
    pub struct DenseMatrix {
        n: usize,
        data: Vec<f64>,
    }

    impl DenseMatrix {
        pub fn zeros(n: usize) -> Self {
            Self { n, data: vec![0.0; n * n] }
        }

        pub fn size(&self) -> usize {
            self.n
        }

        pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
            (0..self.n)
                .map(|r| (0..self.n).map(|c| self[(r, c)] * x[c]).sum())
                .collect()
        }
    }

    impl std::ops::Index<(usize, usize)> for DenseMatrix {
        type Output = f64;
        fn index(&self, (r, c): (usize, usize)) -> &f64 {
            &self.data[r * self.n + c]
        }
    }

    impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
        fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
            &mut self.data[r * self.n + c]
        }
    }

    /// Gaussian elimination with partial pivoting.
    pub fn solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
        let n = a.size();
        let mut m = a.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs()))
                .unwrap();
            if m[(pivot, k)] == 0.0 {
                return Err(FemError::ZeroDiagonal { row: k });
            }
            if pivot != k {
                for c in 0..n {
                    let t = m[(k, c)];
                    m[(k, c)] = m[(pivot, c)];
                    m[(pivot, c)] = t;
                }
                x.swap(k, pivot);
            }
            for i in k + 1..n {
                let f = m[(i, k)] / m[(k, k)];
                if f == 0.0 {
                    continue;
                }
                for c in k..n {
                    let v = m[(k, c)];
                    m[(i, c)] -= f * v;
                }
                x[i] -= f * x[k];
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for c in k + 1..n {
                acc -= m[(k, c)] * x[c];
            }
            x[k] = acc / m[(k, k)];
        }
        Ok(x)
    }

    /// Cholesky factorization; fails iff the matrix is not positive definite.
    pub fn cholesky(a: &DenseMatrix) -> Result<DenseMatrix> {
        let n = a.size();
        let mut l = DenseMatrix::zeros(n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= 0.0 {
                return Err(FemError::NotPositiveDefinite { pivot: j });
            }
            l[(j, j)] = d.sqrt();
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / l[(j, j)];
            }
        }
        Ok(l)
    }

    /// Smallest eigenvalue of a symmetric matrix by inverse iteration on a
    /// Gershgorin-shifted copy (the shift makes the target eigenvalue the
    /// one of smallest magnitude, so plain inverse iteration finds it even
    /// for indefinite input).
    pub fn smallest_eigenvalue(a: &DenseMatrix, iterations: usize) -> f64 {
        let n = a.size();
        let shift = (0..n)
            .map(|i| {
                let radius: f64 =
                    (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
                a[(i, i)] - radius
            })
            .fold(f64::MAX, f64::min)
            - 1.0;
        let mut shifted = a.clone();
        for i in 0..n {
            shifted[(i, i)] -= shift;
        }
        let mut x = vec![1.0 / (n as f64).sqrt(); n];
        for _ in 0..iterations {
            let y = solve(&shifted, &x).expect("shifted matrix is positive definite");
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            for i in 0..n {
                x[i] = y[i] / norm;
            }
        }
        let ax = a.matvec(&x);
        let rayleigh: f64 = x.iter().zip(&ax).map(|(xi, yi)| xi * yi).sum();
        rayleigh
    }
}
