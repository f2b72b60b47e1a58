//! Complex sparse matrix containers.
//!
//! `CooMatrix` is the assembly/interchange format (triplets, duplicates
//! allowed until `assemble`); `CscMatrix` is the operational format used by
//! matrix-vector products and the sparse factorization.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Coordinate-format sparse matrix used during assembly and file exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl CooMatrix {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        CooMatrix {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    /// Add a triplet. Duplicate positions accumulate when the matrix is
    /// assembled into CSC form.
    pub fn push(&mut self, row: usize, col: usize, value: Complex64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        if value != Complex64::ZERO {
            self.entries.push((row, col, value));
        }
    }

    pub fn push_real(&mut self, row: usize, col: usize, value: f64) {
        self.push(row, col, Complex64::new(value, 0.0));
    }

    /// Sum duplicates and produce the compressed column form.
    pub fn to_csc(&self) -> CscMatrix {
        CscMatrix::from_triplets(self.n_rows, self.n_cols, &self.entries)
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|(_, _, v)| v.re.is_finite() && v.im.is_finite())
    }
}

/// Compressed sparse column matrix with complex entries.
///
/// Entries within a column are sorted by row index and duplicate positions
/// have been summed, so the structure is canonical for a given matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    n_rows: usize,
    n_cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl CscMatrix {
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, Complex64)],
    ) -> Self {
        let mut per_col: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n_cols];
        for &(r, c, v) in triplets {
            per_col[c].push((r, v));
        }
        let mut col_ptr = Vec::with_capacity(n_cols + 1);
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        col_ptr.push(0);
        for col in per_col.iter_mut() {
            col.sort_by_key(|&(r, _)| r);
            let mut k = 0;
            while k < col.len() {
                let row = col[k].0;
                let mut acc = Complex64::ZERO;
                while k < col.len() && col[k].0 == row {
                    acc += col[k].1;
                    k += 1;
                }
                if acc != Complex64::ZERO {
                    row_idx.push(row);
                    values.push(acc);
                }
            }
            col_ptr.push(row_idx.len());
        }
        CscMatrix {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CscMatrix {
            n_rows,
            n_cols,
            col_ptr: vec![0; n_cols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, Complex64::ONE)).collect();
        Self::from_triplets(n, n, &triplets)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_idx.is_empty()
    }

    /// Column `j` as parallel row-index/value slices.
    pub fn col(&self, j: usize) -> (&[usize], &[Complex64]) {
        let lo = self.col_ptr[j];
        let hi = self.col_ptr[j + 1];
        (&self.row_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for j in 0..self.n_cols {
            let (rows, vals) = self.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                out.push((r, j, v));
            }
        }
        out
    }

    /// y += alpha * A * x
    pub fn axpy(&self, alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.n_cols, "axpy: x length");
        assert_eq!(y.len(), self.n_rows, "axpy: y length");
        for j in 0..self.n_cols {
            let xj = alpha * x[j];
            if xj == Complex64::ZERO {
                continue;
            }
            let (rows, vals) = self.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                y[r] += v * xj;
            }
        }
    }

    /// y += alpha * A^T * x, with the unconjugated transpose.
    pub fn axpy_transpose(&self, alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.n_rows, "axpy_transpose: x length");
        assert_eq!(y.len(), self.n_cols, "axpy_transpose: y length");
        for j in 0..self.n_cols {
            let (rows, vals) = self.col(j);
            let mut acc = Complex64::ZERO;
            for (&r, &v) in rows.iter().zip(vals) {
                acc += v * x[r];
            }
            y[j] += alpha * acc;
        }
    }

    /// Accumulate `alpha * A * X` into the dense block `y` (column by column).
    pub fn axpy_block(&self, alpha: Complex64, x: &DMatrix<Complex64>, y: &mut DMatrix<Complex64>) {
        assert_eq!(x.nrows(), self.n_cols);
        assert_eq!(y.nrows(), self.n_rows);
        assert_eq!(x.ncols(), y.ncols());
        for k in 0..x.ncols() {
            let xc: Vec<Complex64> = x.column(k).iter().copied().collect();
            let mut yc: Vec<Complex64> = y.column(k).iter().copied().collect();
            self.axpy(alpha, &xc, &mut yc);
            y.column_mut(k).copy_from_slice(&yc);
        }
    }

    /// Accumulate `alpha * A^T * X` into `y`.
    pub fn axpy_transpose_block(
        &self,
        alpha: Complex64,
        x: &DMatrix<Complex64>,
        y: &mut DMatrix<Complex64>,
    ) {
        assert_eq!(x.nrows(), self.n_rows);
        assert_eq!(y.nrows(), self.n_cols);
        assert_eq!(x.ncols(), y.ncols());
        for k in 0..x.ncols() {
            let xc: Vec<Complex64> = x.column(k).iter().copied().collect();
            let mut yc: Vec<Complex64> = y.column(k).iter().copied().collect();
            self.axpy_transpose(alpha, &xc, &mut yc);
            y.column_mut(k).copy_from_slice(&yc);
        }
    }

    /// Scale by a scalar, returning a new matrix.
    pub fn scaled(&self, alpha: Complex64) -> CscMatrix {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v *= alpha;
        }
        out
    }

    /// Sum of scaled matrices over a shared dimension: `sum_k alpha_k * M_k`.
    pub fn linear_combination(terms: &[(Complex64, &CscMatrix)]) -> Result<CscMatrix> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("linear combination of zero terms".into()))?;
        let (n_rows, n_cols) = (first.1.n_rows, first.1.n_cols);
        let mut triplets = Vec::new();
        for &(alpha, m) in terms {
            if m.n_rows != n_rows || m.n_cols != n_cols {
                return Err(Error::dim(
                    "linear_combination",
                    format!("{}x{}", n_rows, n_cols),
                    format!("{}x{}", m.n_rows, m.n_cols),
                ));
            }
            if alpha == Complex64::ZERO {
                continue;
            }
            for j in 0..n_cols {
                let (rows, vals) = m.col(j);
                for (&r, &v) in rows.iter().zip(vals) {
                    triplets.push((r, j, alpha * v));
                }
            }
        }
        Ok(CscMatrix::from_triplets(n_rows, n_cols, &triplets))
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.n_rows, self.n_cols);
        for j in 0..self.n_cols {
            let (rows, vals) = self.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                out[(r, j)] += v;
            }
        }
        out
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let mut triplets = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != Complex64::ZERO {
                    triplets.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &triplets)
    }

    /// Plain (unconjugated) transpose.
    pub fn transpose(&self) -> CscMatrix {
        let triplets: Vec<_> = self
            .triplets()
            .into_iter()
            .map(|(r, c, v)| (c, r, v))
            .collect();
        CscMatrix::from_triplets(self.n_cols, self.n_rows, &triplets)
    }
}
