//! Linear algebra core: sparse storage, sparse LU, and projection bases.

pub mod basis;
pub mod dense;
pub mod lu;
pub mod sparse;

pub use basis::{BasisMatrix, OrthStats, DEFLATION_RTOL};
pub use dense::{complex_from_real, join_complex, max_abs, max_modulus, split_complex};
pub use lu::SparseLu;
pub use sparse::{CooMatrix, CscMatrix};
