//! Real orthonormal projection bases grown incrementally from complex blocks.

use crate::linalg::dense::{join_complex, split_complex};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Columns whose orthogonalized residual falls below this fraction of the
/// original column norm are dropped as numerically dependent.
pub const DEFLATION_RTOL: f64 = 1e-10;

/// Outcome of one basis extension.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OrthStats {
    pub added: usize,
    pub deflated: usize,
}

/// Real matrix with orthonormal columns, maintained by construction.
///
/// Complex candidate columns are split into their real and imaginary parts
/// (in that order) before orthogonalization, so projection onto the basis is
/// real arithmetic throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    data: DMatrix<f64>,
}

impl BasisMatrix {
    pub fn empty(n_rows: usize) -> Self {
        BasisMatrix {
            data: DMatrix::zeros(n_rows, 0),
        }
    }

    pub fn from_orthonormal(data: DMatrix<f64>) -> Self {
        BasisMatrix { data }
    }

    pub fn n_rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// Extend with real columns, orthogonalizing by two passes of modified
    /// Gram--Schmidt against all columns present so far (including columns
    /// added earlier in the same call). Returns how many survived.
    pub fn extend_real(&mut self, candidates: &DMatrix<f64>) -> OrthStats {
        assert_eq!(candidates.nrows(), self.n_rows(), "extend: row count");
        let mut stats = OrthStats::default();
        for j in 0..candidates.ncols() {
            let mut v: DVector<f64> = candidates.column(j).into_owned();
            let norm0 = v.norm();
            if norm0 == 0.0 {
                stats.deflated += 1;
                continue;
            }
            for _pass in 0..2 {
                for q in 0..self.data.ncols() {
                    let qcol = self.data.column(q);
                    let coeff = qcol.dot(&v);
                    v.axpy(-coeff, &qcol.into_owned(), 1.0);
                }
            }
            let norm = v.norm();
            if norm < DEFLATION_RTOL * norm0 {
                stats.deflated += 1;
                continue;
            }
            v /= norm;
            let r = self.data.ncols();
            self.data = self.data.clone().resize_horizontally(r + 1, 0.0);
            self.data.column_mut(r).copy_from(&v);
            stats.added += 1;
        }
        stats
    }

    /// Extend with complex columns split into real/imaginary parts.
    pub fn extend_complex(&mut self, candidates: &DMatrix<Complex64>) -> OrthStats {
        assert_eq!(candidates.nrows(), self.n_rows(), "extend: row count");
        let mut real_cols = DMatrix::zeros(self.n_rows(), 2 * candidates.ncols());
        for j in 0..candidates.ncols() {
            for i in 0..candidates.nrows() {
                real_cols[(i, 2 * j)] = candidates[(i, j)].re;
                real_cols[(i, 2 * j + 1)] = candidates[(i, j)].im;
            }
        }
        self.extend_real(&real_cols)
    }

    /// V * x for a complex reduced-space block.
    pub fn mul_complex(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let (re, im) = split_complex(x);
        join_complex(&(&self.data * re), &(&self.data * im))
    }

    /// V^T * x; V is real so the transpose needs no conjugation choice.
    pub fn tr_mul_complex(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let (re, im) = split_complex(x);
        join_complex(&self.data.tr_mul(&re), &self.data.tr_mul(&im))
    }

    /// max |(V^T V - I)_{ij}|, a cheap orthonormality diagnostic.
    pub fn orthonormality_defect(&self) -> f64 {
        let r = self.data.ncols();
        let gram = self.data.tr_mul(&self.data);
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in 0..r {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - want).abs());
            }
        }
        worst
    }
}
