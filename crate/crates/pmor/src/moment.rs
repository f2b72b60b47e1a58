//! Moment-matching basis blocks at an expansion point.
//!
//! The state of an affine system admits a multivariate power series around
//! any nonsingular expansion point. The recursion below spans its moment
//! terms: one operator solve per level, each affine term contributing its own
//! branch, breadth-first, truncated at level `eta`. Level 0 alone reproduces
//! the single-snapshot (reduced-basis) choice.

use crate::error::{Error, Result};
use crate::linalg::basis::BasisMatrix;
use crate::linalg::lu::SparseLu;
use crate::linalg::sparse::CscMatrix;
use crate::system::{AffineParametricSystem, ParameterPoint};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const DEFAULT_MAX_BLOCK_COLS: usize = 200;

/// Which affine terms spawn recursion branches.
///
/// `AllOnes` matches moments with respect to every affine coefficient
/// independently. `FrequencyOnly` keeps branches only for terms whose
/// coefficient varies with the Laplace variable, for non-parametric runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermWeights {
    AllOnes,
    FrequencyOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentConfig {
    /// Number of matched moment levels beyond the snapshot itself.
    pub eta: usize,
    /// Cap on generated basis columns, counted after the real/imaginary split.
    pub max_block_cols: usize,
    pub weights: TermWeights,
}

impl MomentConfig {
    pub fn new(eta: usize) -> Self {
        MomentConfig {
            eta,
            max_block_cols: DEFAULT_MAX_BLOCK_COLS,
            weights: TermWeights::AllOnes,
        }
    }
}

/// Orthonormal block spanning the generated moments.
#[derive(Debug, Clone)]
pub struct MomentBlock {
    pub basis: BasisMatrix,
    /// Set when the column cap stopped generation early.
    pub truncated: bool,
}

/// Pencil assembled and factored at one expansion point. Both the forward
/// and the transposed moment recursions reuse this single factorization.
pub struct AssembledOperator<'a> {
    sys: &'a AffineParametricSystem,
    pt: ParameterPoint,
    lu: SparseLu,
}

impl<'a> AssembledOperator<'a> {
    pub fn new(sys: &'a AffineParametricSystem, pt: &ParameterPoint) -> Result<Self> {
        let a = sys.assemble(pt)?;
        let lu = SparseLu::factor(&a)?;
        Ok(AssembledOperator {
            sys,
            pt: pt.clone(),
            lu,
        })
    }

    pub fn point(&self) -> &ParameterPoint {
        &self.pt
    }

    pub fn factorization(&self) -> &SparseLu {
        &self.lu
    }

    pub fn system(&self) -> &AffineParametricSystem {
        self.sys
    }

    fn branch_matrices(&self, weights: TermWeights) -> Vec<&CscMatrix> {
        let mut out = vec![self.sys.e_matrix()];
        for t in self.sys.a_terms() {
            let keep = match weights {
                TermWeights::AllOnes => true,
                TermWeights::FrequencyOnly => t.coeff.depends_on_s(),
            };
            if keep {
                out.push(&t.matrix);
            }
        }
        out
    }

    /// Moment block for the forward pencil with the given right-hand side.
    pub fn mmm(&self, rhs: &DMatrix<Complex64>, cfg: &MomentConfig) -> Result<MomentBlock> {
        self.mmm_impl(rhs, cfg, false)
    }

    /// Moment block for the transposed pencil (dual quantities).
    pub fn mmm_transposed(
        &self,
        rhs: &DMatrix<Complex64>,
        cfg: &MomentConfig,
    ) -> Result<MomentBlock> {
        self.mmm_impl(rhs, cfg, true)
    }

    fn mmm_impl(
        &self,
        rhs: &DMatrix<Complex64>,
        cfg: &MomentConfig,
        transposed: bool,
    ) -> Result<MomentBlock> {
        let n = self.sys.n();
        if rhs.nrows() != n {
            return Err(Error::dim("moment right-hand side", n, rhs.nrows()));
        }
        if rhs.ncols() == 0 {
            return Err(Error::InvalidArgument("moment right-hand side has no columns".into()));
        }
        if cfg.max_block_cols < rhs.ncols() {
            return Err(Error::InvalidArgument(format!(
                "column cap {} below right-hand-side width {}",
                cfg.max_block_cols,
                rhs.ncols()
            )));
        }

        let solve = |x: &DMatrix<Complex64>| {
            if transposed {
                self.lu.solve_transpose_block(x)
            } else {
                self.lu.solve_block(x)
            }
        };
        let apply = |t: &CscMatrix, x: &DMatrix<Complex64>| {
            let mut y = DMatrix::zeros(n, x.ncols());
            if transposed {
                t.axpy_transpose_block(Complex64::ONE, x, &mut y);
            } else {
                t.axpy_block(Complex64::ONE, x, &mut y);
            }
            y
        };

        let mut basis = BasisMatrix::empty(n);
        let mut truncated = false;
        let r0 = solve(rhs);
        extend_capped(&mut basis, &r0, cfg.max_block_cols, &mut truncated);

        let branches = self.branch_matrices(cfg.weights);
        let mut level = vec![r0];
        for _depth in 1..=cfg.eta {
            if truncated {
                break;
            }
            let mut next = Vec::with_capacity(level.len() * branches.len());
            'level: for x in &level {
                for t in &branches {
                    if truncated {
                        break 'level;
                    }
                    let y = -solve(&apply(t, x));
                    extend_capped(&mut basis, &y, cfg.max_block_cols, &mut truncated);
                    next.push(y);
                }
            }
            level = next;
        }
        Ok(MomentBlock { basis, truncated })
    }
}

/// Extend column by column so the cap is never exceeded; a complex column may
/// contribute two real columns, so stop while both still fit.
fn extend_capped(
    basis: &mut BasisMatrix,
    block: &DMatrix<Complex64>,
    cap: usize,
    truncated: &mut bool,
) {
    for j in 0..block.ncols() {
        if basis.n_cols() + 2 > cap {
            *truncated = true;
            return;
        }
        let col = block.columns(j, 1).into_owned();
        basis.extend_complex(&col);
    }
}
