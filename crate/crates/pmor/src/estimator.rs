//! Residual-based a posteriori output error estimation.
//!
//! The reduction error of the transfer function splits exactly as
//! `H - H_hat = X_du^T r_pr + e_du^T r_pr`, where `r_pr` is the primal
//! residual, `X_du` the approximate dual solution, and `e_du` solves the dual
//! residual equation `A^T e_du = r_du`. Replacing `e_du` by its own reduced
//! approximation gives a computable two-term estimate that needs no stability
//! constant. With the error basis spanning the full space the estimate is a
//! rigorous bound up to round-off.

use crate::error::{Error, Result};
use crate::linalg::basis::BasisMatrix;
use crate::system::{AffineParametricSystem, ParameterPoint, ReducedModel};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Matrices above this order are refused by the dense singular-value bound.
pub const DEFAULT_SVD_CAP: usize = 2000;

/// Transpose convention for the scalar pairings in the estimate.
///
/// The identity behind the estimator uses the plain transpose; conjugation is
/// available as a variant and changes values on complex data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerProduct {
    #[default]
    Unconjugated,
    Conjugated,
}

/// One greedy iteration's choice of expansion points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationRecord {
    pub iteration: usize,
    /// Expansion point feeding the primal and dual bases.
    pub mu: ParameterPoint,
    /// Expansion point feeding the error basis; kept distinct from `mu`.
    pub mu_alpha: ParameterPoint,
}

/// Primal residual and the reduced solution it came from.
#[derive(Debug, Clone)]
pub struct PrimalResidual {
    /// `B(pt) - A(pt) V x_hat`, one column per input.
    pub residual: DMatrix<Complex64>,
    /// Reduced primal solution, r x m.
    pub x_hat: DMatrix<Complex64>,
}

/// Dual residual and the lifted approximate dual solution.
#[derive(Debug, Clone)]
pub struct DualResidual {
    /// `C(pt)^T - A(pt)^T x_tilde`, one column per output.
    pub residual: DMatrix<Complex64>,
    /// `V_du x_hat_du`, n x p.
    pub x_tilde: DMatrix<Complex64>,
}

/// Entrywise two-term error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorEstimate {
    /// Largest entry of `term1 + term2`.
    pub delta: f64,
    /// `|X_du^T r_pr|` per output/input pair, p x m.
    pub term1: DMatrix<f64>,
    /// `|e_du^T r_pr|` per output/input pair, p x m.
    pub term2: DMatrix<f64>,
}

impl ErrorEstimate {
    pub fn delta_entries(&self) -> DMatrix<f64> {
        &self.term1 + &self.term2
    }

    /// Largest entry of the second summand, driving the error-basis point.
    pub fn term2_max(&self) -> f64 {
        self.term2.iter().fold(0.0f64, |acc, v| acc.max(*v))
    }
}

/// Projection bases and their cached reduced models.
///
/// All evaluation methods are read-only, so a sweep over a training set can
/// run concurrently and yields the same values as a sequential pass.
#[derive(Debug, Clone)]
pub struct ReductionState {
    v: BasisMatrix,
    v_du: BasisMatrix,
    v_e: BasisMatrix,
    primal_rom: ReducedModel,
    dual_rom: ReducedModel,
    error_rom: ReducedModel,
    inner: InnerProduct,
    history: Vec<InterpolationRecord>,
}

impl ReductionState {
    /// Project the system onto the three bases. All bases must be nonempty
    /// and live over the same full-order space.
    pub fn new(
        sys: &AffineParametricSystem,
        v: BasisMatrix,
        v_du: BasisMatrix,
        v_e: BasisMatrix,
        inner: InnerProduct,
    ) -> Result<Self> {
        let n = sys.n();
        for (name, basis) in [("primal", &v), ("dual", &v_du), ("error", &v_e)] {
            if basis.n_rows() != n {
                return Err(Error::dim("reduction basis rows", n, basis.n_rows()));
            }
            if basis.is_empty() {
                return Err(Error::InvalidArgument(format!("{name} basis is empty")));
            }
        }
        let sys_t = sys.transposed();
        let primal_rom = sys.project(&v)?;
        let dual_rom = sys_t.project(&v_du)?;
        let error_rom = sys_t.project(&v_e)?;
        Ok(ReductionState {
            v,
            v_du,
            v_e,
            primal_rom,
            dual_rom,
            error_rom,
            inner,
            history: Vec::new(),
        })
    }

    pub fn with_history(mut self, history: Vec<InterpolationRecord>) -> Self {
        self.history = history;
        self
    }

    pub fn history(&self) -> &[InterpolationRecord] {
        &self.history
    }

    pub fn basis(&self) -> &BasisMatrix {
        &self.v
    }

    pub fn dual_basis(&self) -> &BasisMatrix {
        &self.v_du
    }

    pub fn error_basis(&self) -> &BasisMatrix {
        &self.v_e
    }

    pub fn primal_rom(&self) -> &ReducedModel {
        &self.primal_rom
    }

    pub fn inner_product(&self) -> InnerProduct {
        self.inner
    }

    /// Reduced transfer function through the cached primal model.
    pub fn rom_transfer(&self, pt: &ParameterPoint) -> Result<DMatrix<Complex64>> {
        self.primal_rom.rom_transfer(pt)
    }

    /// Primal residual `B(pt) - A(pt) V x_hat` with its reduced solution.
    pub fn primal_residual(
        &self,
        sys: &AffineParametricSystem,
        pt: &ParameterPoint,
    ) -> Result<PrimalResidual> {
        let x_hat = self.primal_rom.solve_state(pt)?;
        let x_tilde = self.v.mul_complex(&x_hat);
        let a = sys.assemble(pt)?;
        let mut residual = sys.eval_b(pt)?;
        a.axpy_block(-Complex64::ONE, &x_tilde, &mut residual);
        Ok(PrimalResidual { residual, x_hat })
    }

    /// Dual residual `C(pt)^T - A(pt)^T x_tilde_du` with the lifted dual
    /// approximation.
    pub fn dual_residual(
        &self,
        sys: &AffineParametricSystem,
        pt: &ParameterPoint,
    ) -> Result<DualResidual> {
        let x_hat_du = self.dual_rom.solve_state(pt)?;
        let x_tilde = self.v_du.mul_complex(&x_hat_du);
        let a = sys.assemble(pt)?;
        let mut residual = sys.eval_c(pt)?.transpose();
        a.axpy_transpose_block(-Complex64::ONE, &x_tilde, &mut residual);
        Ok(DualResidual { residual, x_tilde })
    }

    /// Approximate the dual-residual correction: solve the error-reduced
    /// system `(V_e^T A^T V_e) e_hat = V_e^T r_du` and lift.
    pub fn dual_residual_correction(
        &self,
        sys: &AffineParametricSystem,
        pt: &ParameterPoint,
        r_du: &DMatrix<Complex64>,
    ) -> Result<DMatrix<Complex64>> {
        if r_du.nrows() != sys.n() {
            return Err(Error::dim("dual residual rows", sys.n(), r_du.nrows()));
        }
        let a_e = self.error_rom.assemble(pt)?;
        let rhs = self.v_e.tr_mul_complex(r_du);
        let e_hat = a_e
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularReducedOperator { order: self.v_e.n_cols() })?;
        Ok(self.v_e.mul_complex(&e_hat))
    }

    fn pairings(&self, left: &DMatrix<Complex64>, right: &DMatrix<Complex64>) -> DMatrix<f64> {
        let prod = match self.inner {
            InnerProduct::Unconjugated => left.tr_mul(right),
            InnerProduct::Conjugated => left.ad_mul(right),
        };
        prod.map(|v| v.norm())
    }

    /// Two-term estimate of `|H - H_hat|` at one point, entrywise over
    /// output/input pairs; `delta` is the largest entry of the sum.
    pub fn estimate(
        &self,
        sys: &AffineParametricSystem,
        pt: &ParameterPoint,
    ) -> Result<ErrorEstimate> {
        let primal = self.primal_residual(sys, pt)?;
        let dual = self.dual_residual(sys, pt)?;
        let e_tilde = self.dual_residual_correction(sys, pt, &dual.residual)?;
        let term1 = self.pairings(&dual.x_tilde, &primal.residual);
        let term2 = self.pairings(&e_tilde, &primal.residual);
        let delta = term1
            .iter()
            .zip(term2.iter())
            .fold(0.0f64, |acc, (a, b)| acc.max(a + b));
        Ok(ErrorEstimate { delta, term1, term2 })
    }

    /// Classical residual bound `|r_pr| |r_du| / sigma_min(A(pt))` via dense
    /// singular values; block residuals enter through Frobenius norms.
    pub fn infsup_bound(&self, sys: &AffineParametricSystem, pt: &ParameterPoint) -> Result<f64> {
        self.infsup_bound_with_cap(sys, pt, DEFAULT_SVD_CAP)
    }

    pub fn infsup_bound_with_cap(
        &self,
        sys: &AffineParametricSystem,
        pt: &ParameterPoint,
        cap: usize,
    ) -> Result<f64> {
        if sys.n() > cap {
            return Err(Error::UnsupportedSize { size: sys.n(), cap });
        }
        let r_pr = self.primal_residual(sys, pt)?.residual;
        let r_du = self.dual_residual(sys, pt)?.residual;
        let a = sys.assemble(pt)?.to_dense();
        let svd = a.svd(false, false);
        let sigma_min = svd.singular_values.min();
        if sigma_min == 0.0 {
            return Err(Error::SingularMatrix { pivot_index: 0 });
        }
        Ok(r_pr.norm() * r_du.norm() / sigma_min)
    }
}
