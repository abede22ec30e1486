//! Dense helpers for affine constraint sets.

use nalgebra::{DMatrix, DVector};

/// `{x : A x = b}` split into an orthonormal row basis and a null-space basis.
#[derive(Debug, Clone)]
pub(crate) struct AffineSubspace {
    /// `r x n`, orthonormal rows spanning the row space of `A`.
    pub rows: DMatrix<f64>,
    /// Right-hand side for `rows`: the set is `{x : rows x = rhs}`.
    pub rhs: DVector<f64>,
    /// `n x (n - r)`, orthonormal columns spanning the null space of `A`.
    pub null: DMatrix<f64>,
}

impl AffineSubspace {
    pub fn new(a: &DMatrix<f64>, b: &DVector<f64>) -> Self {
        let n = a.ncols();
        let m = a.nrows().max(n);
        let mut padded = DMatrix::zeros(m, n);
        padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        let mut rhs_padded = DVector::zeros(m);
        rhs_padded.rows_mut(0, b.len()).copy_from(b);
        let svd = padded.svd(true, true);
        let u = svd.u.expect("requested U");
        let v_t = svd.v_t.expect("requested V^T");
        let sigma = &svd.singular_values;
        let largest = sigma.iter().copied().fold(0.0, f64::max);
        let tol = 1e-10 * largest.max(1.0);
        let (mut row_idx, mut null_idx) = (Vec::new(), Vec::new());
        for i in 0..n {
            if sigma[i] > tol {
                row_idx.push(i);
            } else {
                null_idx.push(i);
            }
        }
        let rows = DMatrix::from_fn(row_idx.len(), n, |r, c| v_t[(row_idx[r], c)]);
        let rhs = DVector::from_fn(row_idx.len(), |r, _| {
            let i = row_idx[r];
            u.column(i).dot(&rhs_padded) / sigma[i]
        });
        let null = DMatrix::from_fn(n, null_idx.len(), |r, c| v_t[(null_idx[c], r)]);
        AffineSubspace { rows, rhs, null }
    }

    /// `Z^T v`.
    pub fn reduce(&self, v: &DVector<f64>) -> DVector<f64> {
        self.null.tr_mul(v)
    }

    pub fn residual(&self, x: &DVector<f64>) -> f64 {
        (&self.rows * x - &self.rhs).norm()
    }
}

/// Minimum-norm least-squares solution of `M x = rhs`.
pub(crate) fn pinv_solve(m: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let svd = m.clone().svd(true, true);
    let largest = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = 1e-12 * largest.max(1e-300);
    svd.solve(rhs, tol).expect("U and V^T were requested")
}
