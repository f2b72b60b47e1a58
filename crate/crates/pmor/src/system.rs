//! Affine-parametric descriptor systems and their Galerkin projections.
//!
//! A system is `E x' = A(mu) x + B u`, `y = C x`, evaluated in the frequency
//! domain through the pencil `A(pt) = s E - sum_j theta_j(pt) A_j`. Input and
//! output maps may carry the same affine structure, which covers pencils like
//! `S + s^2 T` with `B(s) = s Q` after folding signs into the stored matrices.

use crate::error::{Error, Result};
use crate::linalg::basis::BasisMatrix;
use crate::linalg::dense::complex_from_real;
use crate::linalg::lu::SparseLu;
use crate::linalg::sparse::CscMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Point in the joint frequency/parameter domain.
///
/// `s` is the Laplace variable in radians per second; the shipped drivers
/// always use purely imaginary `s = j 2 pi f`. `mu` holds the physical
/// parameters in the order declared by the owning system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint {
    pub s: Complex64,
    pub mu: Vec<f64>,
}

impl ParameterPoint {
    pub fn new(s: Complex64, mu: Vec<f64>) -> Self {
        ParameterPoint { s, mu }
    }

    pub fn from_frequency_hz(f_hz: f64, mu: Vec<f64>) -> Self {
        ParameterPoint::new(Complex64::new(0.0, 2.0 * std::f64::consts::PI * f_hz), mu)
    }

    /// Number of physical parameters (the frequency axis not counted).
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn is_finite(&self) -> bool {
        self.s.re.is_finite()
            && self.s.im.is_finite()
            && self.mu.iter().all(|v| v.is_finite())
    }

    pub fn key(&self) -> PointKey {
        let mut bits = Vec::with_capacity(2 + self.mu.len());
        bits.push(self.s.re.to_bits());
        bits.push(self.s.im.to_bits());
        bits.extend(self.mu.iter().map(|v| v.to_bits()));
        PointKey(bits)
    }

    /// Frequency in Hz recovered from the imaginary part of `s`.
    pub fn frequency_hz(&self) -> f64 {
        self.s.im / (2.0 * std::f64::consts::PI)
    }
}

/// Bit-pattern identity of a point, usable as a hash key. Two points compare
/// equal exactly when every component has identical bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointKey(Vec<u64>);

/// Scalar coefficient attached to an affine term, evaluated at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coefficient {
    Constant { value: f64 },
    /// The Laplace variable itself.
    S,
    /// s^2, for second-order pencils folded into first-order affine form.
    SSquared,
    /// One physical parameter, by position.
    Param { index: usize },
    Scaled { factor: f64, inner: Box<Coefficient> },
    Product { factors: Vec<Coefficient> },
    Sum { terms: Vec<Coefficient> },
}

impl Coefficient {
    pub fn eval(&self, pt: &ParameterPoint) -> Complex64 {
        match self {
            Coefficient::Constant { value } => Complex64::new(*value, 0.0),
            Coefficient::S => pt.s,
            Coefficient::SSquared => pt.s * pt.s,
            Coefficient::Param { index } => Complex64::new(pt.mu[*index], 0.0),
            Coefficient::Scaled { factor, inner } => inner.eval(pt) * *factor,
            Coefficient::Product { factors } => factors
                .iter()
                .fold(Complex64::ONE, |acc, f| acc * f.eval(pt)),
            Coefficient::Sum { terms } => terms
                .iter()
                .fold(Complex64::ZERO, |acc, t| acc + t.eval(pt)),
        }
    }

    /// True when the coefficient varies with the Laplace variable.
    pub fn depends_on_s(&self) -> bool {
        match self {
            Coefficient::Constant { .. } | Coefficient::Param { .. } => false,
            Coefficient::S | Coefficient::SSquared => true,
            Coefficient::Scaled { inner, .. } => inner.depends_on_s(),
            Coefficient::Product { factors } => factors.iter().any(Coefficient::depends_on_s),
            Coefficient::Sum { terms } => terms.iter().any(Coefficient::depends_on_s),
        }
    }

    fn max_param_index(&self) -> Option<usize> {
        match self {
            Coefficient::Constant { .. } | Coefficient::S | Coefficient::SSquared => None,
            Coefficient::Param { index } => Some(*index),
            Coefficient::Scaled { inner, .. } => inner.max_param_index(),
            Coefficient::Product { factors } => {
                factors.iter().filter_map(Coefficient::max_param_index).max()
            }
            Coefficient::Sum { terms } => {
                terms.iter().filter_map(Coefficient::max_param_index).max()
            }
        }
    }
}

/// One affine term: a scalar coefficient times a fixed sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineTerm {
    pub coeff: Coefficient,
    pub matrix: CscMatrix,
}

impl AffineTerm {
    pub fn new(coeff: Coefficient, matrix: CscMatrix) -> Self {
        AffineTerm { coeff, matrix }
    }

    pub fn constant(value: f64, matrix: CscMatrix) -> Self {
        AffineTerm::new(Coefficient::Constant { value }, matrix)
    }
}

/// Declared range of one physical parameter, for manifests and scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

/// Descriptor system with affine parameter dependence.
///
/// The frequency-domain pencil is `s E - sum_j theta_j(pt) A_j`; input and
/// output maps are affine sums of the same form (usually a single constant
/// term).
#[derive(Debug, Clone, PartialEq)]
pub struct AffineParametricSystem {
    e: CscMatrix,
    a_terms: Vec<AffineTerm>,
    b_terms: Vec<AffineTerm>,
    c_terms: Vec<AffineTerm>,
    params: Vec<ParamSpec>,
}

impl AffineParametricSystem {
    pub fn new(
        e: CscMatrix,
        a_terms: Vec<AffineTerm>,
        b_terms: Vec<AffineTerm>,
        c_terms: Vec<AffineTerm>,
        params: Vec<ParamSpec>,
    ) -> Result<Self> {
        let n = e.n_rows();
        if e.n_cols() != n {
            return Err(Error::dim("state matrix E", format!("{n}x{n}"), format!("{n}x{}", e.n_cols())));
        }
        if a_terms.is_empty() {
            return Err(Error::InvalidArgument("system needs at least one affine term".into()));
        }
        if b_terms.is_empty() || c_terms.is_empty() {
            return Err(Error::InvalidArgument("system needs input and output maps".into()));
        }
        for t in &a_terms {
            if t.matrix.n_rows() != n || t.matrix.n_cols() != n {
                return Err(Error::dim(
                    "affine term",
                    format!("{n}x{n}"),
                    format!("{}x{}", t.matrix.n_rows(), t.matrix.n_cols()),
                ));
            }
        }
        let m = b_terms[0].matrix.n_cols();
        for t in &b_terms {
            if t.matrix.n_rows() != n || t.matrix.n_cols() != m {
                return Err(Error::dim(
                    "input map term",
                    format!("{n}x{m}"),
                    format!("{}x{}", t.matrix.n_rows(), t.matrix.n_cols()),
                ));
            }
        }
        let p = c_terms[0].matrix.n_rows();
        for t in &c_terms {
            if t.matrix.n_rows() != p || t.matrix.n_cols() != n {
                return Err(Error::dim(
                    "output map term",
                    format!("{p}x{n}"),
                    format!("{}x{}", t.matrix.n_rows(), t.matrix.n_cols()),
                ));
            }
        }
        let d = params.len();
        let coeffs = a_terms
            .iter()
            .chain(&b_terms)
            .chain(&c_terms)
            .map(|t| &t.coeff);
        for c in coeffs {
            if let Some(idx) = c.max_param_index() {
                if idx >= d {
                    return Err(Error::InvalidArgument(format!(
                        "coefficient references parameter {idx} but only {d} are declared"
                    )));
                }
            }
        }
        Ok(AffineParametricSystem {
            e,
            a_terms,
            b_terms,
            c_terms,
            params,
        })
    }

    pub fn n(&self) -> usize {
        self.e.n_rows()
    }

    pub fn m(&self) -> usize {
        self.b_terms[0].matrix.n_cols()
    }

    pub fn p(&self) -> usize {
        self.c_terms[0].matrix.n_rows()
    }

    pub fn d(&self) -> usize {
        self.params.len()
    }

    pub fn e_matrix(&self) -> &CscMatrix {
        &self.e
    }

    pub fn a_terms(&self) -> &[AffineTerm] {
        &self.a_terms
    }

    pub fn b_terms(&self) -> &[AffineTerm] {
        &self.b_terms
    }

    pub fn c_terms(&self) -> &[AffineTerm] {
        &self.c_terms
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn check_point(&self, pt: &ParameterPoint) -> Result<()> {
        if pt.dim() != self.d() {
            return Err(Error::dim("parameter point", self.d(), pt.dim()));
        }
        if !pt.is_finite() {
            return Err(Error::InvalidArgument("parameter point has non-finite components".into()));
        }
        Ok(())
    }

    /// Frequency-domain pencil `s E - sum_j theta_j(pt) A_j`.
    pub fn assemble(&self, pt: &ParameterPoint) -> Result<CscMatrix> {
        self.check_point(pt)?;
        let mut terms: Vec<(Complex64, &CscMatrix)> = Vec::with_capacity(1 + self.a_terms.len());
        terms.push((pt.s, &self.e));
        for t in &self.a_terms {
            terms.push((-t.coeff.eval(pt), &t.matrix));
        }
        CscMatrix::linear_combination(&terms)
    }

    fn eval_terms(terms: &[AffineTerm], pt: &ParameterPoint) -> DMatrix<Complex64> {
        let rows = terms[0].matrix.n_rows();
        let cols = terms[0].matrix.n_cols();
        let mut out = DMatrix::zeros(rows, cols);
        for t in terms {
            let theta = t.coeff.eval(pt);
            if theta == Complex64::ZERO {
                continue;
            }
            for (r, c, v) in t.matrix.triplets() {
                out[(r, c)] += theta * v;
            }
        }
        out
    }

    /// Input map at a point, dense n x m.
    pub fn eval_b(&self, pt: &ParameterPoint) -> Result<DMatrix<Complex64>> {
        self.check_point(pt)?;
        Ok(Self::eval_terms(&self.b_terms, pt))
    }

    /// Output map at a point, dense p x n.
    pub fn eval_c(&self, pt: &ParameterPoint) -> Result<DMatrix<Complex64>> {
        self.check_point(pt)?;
        Ok(Self::eval_terms(&self.c_terms, pt))
    }

    /// Full-order transfer function `C(pt) A(pt)^{-1} B(pt)`, p x m.
    pub fn transfer_function(&self, pt: &ParameterPoint) -> Result<DMatrix<Complex64>> {
        let a = self.assemble(pt)?;
        let lu = SparseLu::factor(&a)?;
        let x = lu.solve_block(&self.eval_b(pt)?);
        Ok(self.eval_c(pt)? * x)
    }

    /// System with every matrix transposed and input/output maps swapped.
    /// Its pencil is the unconjugated transpose of this system's pencil, so
    /// dual quantities can reuse the primal machinery.
    pub fn transposed(&self) -> AffineParametricSystem {
        let flip = |terms: &[AffineTerm]| {
            terms
                .iter()
                .map(|t| AffineTerm::new(t.coeff.clone(), t.matrix.transpose()))
                .collect::<Vec<_>>()
        };
        AffineParametricSystem {
            e: self.e.transpose(),
            a_terms: flip(&self.a_terms),
            b_terms: flip(&self.c_terms),
            c_terms: flip(&self.b_terms),
            params: self.params.clone(),
        }
    }

    /// Galerkin projection onto the span of `v` (one-sided, W = V).
    pub fn project(&self, v: &BasisMatrix) -> Result<ReducedModel> {
        if v.is_empty() {
            return Err(Error::InvalidArgument("projection basis is empty".into()));
        }
        if v.n_rows() != self.n() {
            return Err(Error::dim("projection basis rows", self.n(), v.n_rows()));
        }
        let vc = complex_from_real(v.as_matrix());
        let r = v.n_cols();
        let project_pencil = |m: &CscMatrix| {
            let mut mv = DMatrix::zeros(self.n(), r);
            m.axpy_block(Complex64::ONE, &vc, &mut mv);
            v.tr_mul_complex(&mv)
        };
        let e_hat = project_pencil(&self.e);
        let a_terms = self
            .a_terms
            .iter()
            .map(|t| (t.coeff.clone(), project_pencil(&t.matrix)))
            .collect();
        let b_terms = self
            .b_terms
            .iter()
            .map(|t| (t.coeff.clone(), v.tr_mul_complex(&t.matrix.to_dense())))
            .collect();
        let c_terms = self
            .c_terms
            .iter()
            .map(|t| {
                let mut cv = DMatrix::zeros(self.p(), r);
                t.matrix.axpy_block(Complex64::ONE, &vc, &mut cv);
                (t.coeff.clone(), cv)
            })
            .collect();
        Ok(ReducedModel {
            v: v.clone(),
            e_hat,
            a_terms,
            b_terms,
            c_terms,
            d: self.d(),
        })
    }
}

/// Dense reduced-order model produced by Galerkin projection.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    v: BasisMatrix,
    e_hat: DMatrix<Complex64>,
    a_terms: Vec<(Coefficient, DMatrix<Complex64>)>,
    b_terms: Vec<(Coefficient, DMatrix<Complex64>)>,
    c_terms: Vec<(Coefficient, DMatrix<Complex64>)>,
    d: usize,
}

impl ReducedModel {
    pub fn order(&self) -> usize {
        self.v.n_cols()
    }

    pub fn basis(&self) -> &BasisMatrix {
        &self.v
    }

    pub fn e_hat(&self) -> &DMatrix<Complex64> {
        &self.e_hat
    }

    pub fn a_terms(&self) -> &[(Coefficient, DMatrix<Complex64>)] {
        &self.a_terms
    }

    fn check_point(&self, pt: &ParameterPoint) -> Result<()> {
        if pt.dim() != self.d {
            return Err(Error::dim("parameter point", self.d, pt.dim()));
        }
        Ok(())
    }

    /// Reduced pencil `s E_hat - sum_j theta_j(pt) A_hat_j`, dense r x r.
    pub fn assemble(&self, pt: &ParameterPoint) -> Result<DMatrix<Complex64>> {
        self.check_point(pt)?;
        let mut out = &self.e_hat * pt.s;
        for (coeff, m) in &self.a_terms {
            let theta = coeff.eval(pt);
            if theta != Complex64::ZERO {
                out -= m * theta;
            }
        }
        Ok(out)
    }

    fn eval_terms(terms: &[(Coefficient, DMatrix<Complex64>)], pt: &ParameterPoint) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(terms[0].1.nrows(), terms[0].1.ncols());
        for (coeff, m) in terms {
            let theta = coeff.eval(pt);
            if theta != Complex64::ZERO {
                out += m * theta;
            }
        }
        out
    }

    pub fn eval_b(&self, pt: &ParameterPoint) -> Result<DMatrix<Complex64>> {
        self.check_point(pt)?;
        Ok(Self::eval_terms(&self.b_terms, pt))
    }

    pub fn eval_c(&self, pt: &ParameterPoint) -> Result<DMatrix<Complex64>> {
        self.check_point(pt)?;
        Ok(Self::eval_terms(&self.c_terms, pt))
    }

    /// Reduced state block `A_hat(pt)^{-1} B_hat(pt)`, r x m.
    pub fn solve_state(&self, pt: &ParameterPoint) -> Result<DMatrix<Complex64>> {
        let a = self.assemble(pt)?;
        let b = self.eval_b(pt)?;
        a.lu()
            .solve(&b)
            .ok_or(Error::SingularReducedOperator { order: self.order() })
    }

    /// Reduced transfer function, p x m.
    pub fn rom_transfer(&self, pt: &ParameterPoint) -> Result<DMatrix<Complex64>> {
        let x = self.solve_state(pt)?;
        Ok(self.eval_c(pt)? * x)
    }

    /// Lift a reduced block back to full coordinates: V * x.
    pub fn lift(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        self.v.mul_complex(x)
    }
}
