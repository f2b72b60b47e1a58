//! Sparse LU factorization with partial pivoting.
//!
//! Left-looking column factorization: each column of the factors is obtained
//! by a sparse triangular solve whose nonzero pattern is found by depth-first
//! search through the columns of L computed so far. Row pivoting picks the
//! largest magnitude among rows that are not yet pivotal, so the
//! factorization satisfies `P A = L U` with unit lower triangular L.

use crate::error::{Error, Result};
use crate::linalg::sparse::CscMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Factors of `P A = L U` for a square complex sparse matrix.
///
/// L is unit lower triangular (diagonal stored first in each column), U is
/// upper triangular (diagonal stored last in each column). Row indices of
/// both factors are in pivot coordinates; `perm[k]` is the original row
/// chosen as pivot at step `k`.
#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    l_col_ptr: Vec<usize>,
    l_row: Vec<usize>,
    l_val: Vec<Complex64>,
    u_col_ptr: Vec<usize>,
    u_row: Vec<usize>,
    u_val: Vec<Complex64>,
    perm: Vec<usize>,
}

const NOT_PIVOTAL: usize = usize::MAX;

impl SparseLu {
    pub fn factor(a: &CscMatrix) -> Result<SparseLu> {
        let n = a.n_rows();
        if a.n_cols() != n {
            return Err(Error::dim("sparse LU", format!("{n}x{n}"), format!("{}x{}", n, a.n_cols())));
        }

        let mut l_col_ptr = vec![0usize];
        let mut l_row: Vec<usize> = Vec::with_capacity(4 * a.nnz());
        let mut l_val: Vec<Complex64> = Vec::with_capacity(4 * a.nnz());
        let mut u_col_ptr = vec![0usize];
        let mut u_row: Vec<usize> = Vec::with_capacity(4 * a.nnz());
        let mut u_val: Vec<Complex64> = Vec::with_capacity(4 * a.nnz());

        // pinv: original row -> pivot position, NOT_PIVOTAL until chosen.
        let mut pinv = vec![NOT_PIVOTAL; n];
        let mut perm = vec![0usize; n];
        let mut x = vec![Complex64::ZERO; n];
        let mut mark = vec![0u32; n];
        let mut topo: Vec<usize> = Vec::with_capacity(n);
        let mut stack: Vec<(usize, usize)> = Vec::with_capacity(n);

        for k in 0..n {
            let stamp = (k + 1) as u32;

            // Symbolic: reach of A(:,k)'s pattern through computed L columns.
            // `topo` collects nodes in post-order; reverse gives a valid
            // elimination order.
            topo.clear();
            let (a_rows, a_vals) = a.col(k);
            for &start in a_rows {
                if mark[start] == stamp {
                    continue;
                }
                mark[start] = stamp;
                stack.push((start, 0));
                while let Some(&(node, pos)) = stack.last() {
                    let jcol = pinv[node];
                    let (lo, hi) = if jcol == NOT_PIVOTAL {
                        (0, 0)
                    } else {
                        (l_col_ptr[jcol] + 1, l_col_ptr[jcol + 1])
                    };
                    let mut p = pos;
                    let mut descended = false;
                    while lo + p < hi {
                        let child = l_row[lo + p];
                        p += 1;
                        if mark[child] != stamp {
                            mark[child] = stamp;
                            stack.last_mut().unwrap().1 = p;
                            stack.push((child, 0));
                            descended = true;
                            break;
                        }
                    }
                    if !descended {
                        stack.pop();
                        topo.push(node);
                    }
                }
            }

            // Numeric: x = L \ A(:,k) over the symbolic pattern.
            for &i in &topo {
                x[i] = Complex64::ZERO;
            }
            for (&r, &v) in a_rows.iter().zip(a_vals) {
                x[r] = v;
            }
            for &j in topo.iter().rev() {
                let jcol = pinv[j];
                if jcol == NOT_PIVOTAL {
                    continue;
                }
                let xj = x[j];
                if xj == Complex64::ZERO {
                    continue;
                }
                for p in l_col_ptr[jcol] + 1..l_col_ptr[jcol + 1] {
                    x[l_row[p]] -= l_val[p] * xj;
                }
            }

            // Pivot: largest magnitude among rows not yet pivotal; ties keep
            // the earliest in elimination order for determinism.
            let mut ipiv = NOT_PIVOTAL;
            let mut best = 0.0f64;
            for &i in topo.iter().rev() {
                if pinv[i] == NOT_PIVOTAL {
                    let t = x[i].norm();
                    if t > best {
                        best = t;
                        ipiv = i;
                    }
                } else {
                    u_row.push(pinv[i]);
                    u_val.push(x[i]);
                }
            }
            if ipiv == NOT_PIVOTAL || best == 0.0 {
                return Err(Error::SingularMatrix { pivot_index: k });
            }
            let pivot = x[ipiv];
            pinv[ipiv] = k;
            perm[k] = ipiv;

            l_row.push(ipiv);
            l_val.push(Complex64::ONE);
            for &i in topo.iter().rev() {
                if pinv[i] == NOT_PIVOTAL {
                    let v = x[i] / pivot;
                    if v != Complex64::ZERO {
                        l_row.push(i);
                        l_val.push(v);
                    }
                }
                x[i] = Complex64::ZERO;
            }
            u_row.push(k);
            u_val.push(pivot);
            l_col_ptr.push(l_row.len());
            u_col_ptr.push(u_row.len());
        }

        // Renumber L's rows into pivot coordinates.
        for r in l_row.iter_mut() {
            *r = pinv[*r];
        }

        Ok(SparseLu {
            n,
            l_col_ptr,
            l_row,
            l_val,
            u_col_ptr,
            u_row,
            u_val,
            perm,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n, "solve: rhs length");
        let mut x: Vec<Complex64> = (0..self.n).map(|k| b[self.perm[k]]).collect();
        // L y = P b, unit diagonal stored first per column.
        for k in 0..self.n {
            let xk = x[k];
            if xk == Complex64::ZERO {
                continue;
            }
            for p in self.l_col_ptr[k] + 1..self.l_col_ptr[k + 1] {
                x[self.l_row[p]] -= self.l_val[p] * xk;
            }
        }
        // U x = y, diagonal stored last per column.
        for k in (0..self.n).rev() {
            let lo = self.u_col_ptr[k];
            let hi = self.u_col_ptr[k + 1];
            let xk = x[k] / self.u_val[hi - 1];
            x[k] = xk;
            if xk == Complex64::ZERO {
                continue;
            }
            for p in lo..hi - 1 {
                x[self.u_row[p]] -= self.u_val[p] * xk;
            }
        }
        x
    }

    /// Solve `A^T x = b` with the unconjugated transpose.
    pub fn solve_transpose(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n, "solve_transpose: rhs length");
        let mut w = b.to_vec();
        // U^T w = b: forward substitution gathering over U's columns.
        for k in 0..self.n {
            let lo = self.u_col_ptr[k];
            let hi = self.u_col_ptr[k + 1];
            let mut acc = w[k];
            for p in lo..hi - 1 {
                acc -= self.u_val[p] * w[self.u_row[p]];
            }
            w[k] = acc / self.u_val[hi - 1];
        }
        // L^T z = w: backward substitution, unit diagonal.
        for k in (0..self.n).rev() {
            let mut acc = w[k];
            for p in self.l_col_ptr[k] + 1..self.l_col_ptr[k + 1] {
                acc -= self.l_val[p] * w[self.l_row[p]];
            }
            w[k] = acc;
        }
        // x = P^T z.
        let mut out = vec![Complex64::ZERO; self.n];
        for k in 0..self.n {
            out[self.perm[k]] = w[k];
        }
        out
    }

    /// Column-by-column solve for a dense right-hand-side block.
    pub fn solve_block(&self, rhs: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        assert_eq!(rhs.nrows(), self.n, "solve_block: rhs rows");
        let mut out = DMatrix::zeros(self.n, rhs.ncols());
        for j in 0..rhs.ncols() {
            let b: Vec<Complex64> = rhs.column(j).iter().copied().collect();
            out.column_mut(j).copy_from_slice(&self.solve(&b));
        }
        out
    }

    pub fn solve_transpose_block(&self, rhs: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        assert_eq!(rhs.nrows(), self.n, "solve_transpose_block: rhs rows");
        let mut out = DMatrix::zeros(self.n, rhs.ncols());
        for j in 0..rhs.ncols() {
            let b: Vec<Complex64> = rhs.column(j).iter().copied().collect();
            out.column_mut(j).copy_from_slice(&self.solve_transpose(&b));
        }
        out
    }
}
