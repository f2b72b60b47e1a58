//! Small dense helpers for moving between real and complex blocks.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn split_complex(m: &DMatrix<Complex64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let re = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
    let im = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].im);
    (re, im)
}

pub fn join_complex(re: &DMatrix<f64>, im: &DMatrix<f64>) -> DMatrix<Complex64> {
    assert_eq!(re.shape(), im.shape());
    DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| {
        Complex64::new(re[(i, j)], im[(i, j)])
    })
}

pub fn complex_from_real(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Largest entry magnitude, 0 for an empty matrix.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

pub fn max_modulus(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.norm()))
}
