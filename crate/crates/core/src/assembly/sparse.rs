//! Compressed-row sparse matrices built from triplets, plus the assembled
//! linear system bundle.

use std::fmt::Write as _;

/// Square sparse matrix in compressed row storage with sorted column
/// indices and no explicitly stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Finalizes a triplet list: stable sort by (row, column), duplicate
    /// summation in input order, exact zeros dropped. Deterministic for a
    /// given triplet sequence.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut iter = triplets.into_iter().peekable();
        while let Some((r, c, v)) = iter.next() {
            let mut sum = v;
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    sum += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if sum != 0.0 {
                row_ptr[r + 1] += 1;
                cols.push(c);
                vals.push(sum);
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn num_nonzeros(&self) -> usize {
        self.vals.len()
    }

    /// Entry accessor (zero when not stored).
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.cols[lo..hi].binary_search(&col) {
            Ok(k) => self.vals[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, row: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        (&self.cols[lo..hi], &self.vals[lo..hi])
    }

    /// `y = A x` with a fixed summation order.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(y.len(), self.n);
        for (r, yr) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            *yr = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest absolute difference between the matrix and its transpose.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(*c, r)).abs());
            }
        }
        worst
    }

    /// Dense row-major copy, for small-system oracles.
    pub fn to_dense(&self) -> crate::solver::dense::DenseMatrix {
        let mut dense = crate::solver::dense::DenseMatrix::zeros(self.n);
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                dense[(r, *c)] = *v;
            }
        }
        dense
    }
}

/// Assembled symmetric system `A u = b`.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

impl SparseSystem {
    /// Matrix-market-style text dump: `row col value` per nonzero, then an
    /// `rhs` section with `index value` lines.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let n = self.matrix.nrows();
        let _ = writeln!(out, "matrix {} {}", n, self.matrix.num_nonzeros());
        for r in 0..n {
            let (cols, vals) = self.matrix.row(r);
            for (c, v) in cols.iter().zip(vals) {
                let _ = writeln!(out, "{r} {c} {v:.16e}");
            }
        }
        let _ = writeln!(out, "rhs {n}");
        for (i, v) in self.rhs.iter().enumerate() {
            let _ = writeln!(out, "{i} {v:.16e}");
        }
        out
    }
}
