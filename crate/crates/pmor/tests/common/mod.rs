//! Dense-route oracles for the acceptance criteria. Every linear-algebra step
//! here runs through nalgebra dense factorizations and textbook loops written
//! in this file, independent of the sparse storage, the hand-written sparse
//! LU, and the basis bookkeeping inside the library.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pmor::linalg::{CooMatrix, DEFLATION_RTOL};
use pmor::system::{
    AffineParametricSystem, AffineTerm, Coefficient, ParamSpec, ParameterPoint,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::HashSet;

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Dense copies of every affine term, taken once per problem.
pub struct DenseTerms {
    pub e: DMatrix<Complex64>,
    pub a: Vec<(Coefficient, DMatrix<Complex64>)>,
    pub b: Vec<(Coefficient, DMatrix<Complex64>)>,
    pub c: Vec<(Coefficient, DMatrix<Complex64>)>,
}

impl DenseTerms {
    pub fn new(sys: &AffineParametricSystem) -> Self {
        let take = |terms: &[AffineTerm]| {
            terms
                .iter()
                .map(|t| (t.coeff.clone(), t.matrix.to_dense()))
                .collect::<Vec<_>>()
        };
        DenseTerms {
            e: sys.e_matrix().to_dense(),
            a: take(sys.a_terms()),
            b: take(sys.b_terms()),
            c: take(sys.c_terms()),
        }
    }

    pub fn operator(&self, pt: &ParameterPoint) -> DMatrix<Complex64> {
        let mut out = &self.e * pt.s;
        for (coeff, m) in &self.a {
            out -= m * coeff.eval(pt);
        }
        out
    }

    pub fn input(&self, pt: &ParameterPoint) -> DMatrix<Complex64> {
        eval_terms(&self.b, pt)
    }

    pub fn output(&self, pt: &ParameterPoint) -> DMatrix<Complex64> {
        eval_terms(&self.c, pt)
    }

    pub fn transfer(&self, pt: &ParameterPoint) -> DMatrix<Complex64> {
        let x = dense_solve(&self.operator(pt), &self.input(pt));
        self.output(pt) * x
    }
}

fn eval_terms(
    terms: &[(Coefficient, DMatrix<Complex64>)],
    pt: &ParameterPoint,
) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(terms[0].1.nrows(), terms[0].1.ncols());
    for (coeff, m) in terms {
        out += m * coeff.eval(pt);
    }
    out
}

pub fn dense_solve(a: &DMatrix<Complex64>, rhs: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.clone().lu().solve(rhs).expect("dense oracle solve")
}

/// Two-term estimate recomputed through dense projections. The three bases
/// and all affine terms are pre-projected so a parameter sweep costs only
/// reduced solves and tall-thin products.
pub struct DenseEstimator {
    v_du: DMatrix<Complex64>,
    v_e: DMatrix<Complex64>,
    // reduced pencils, one matrix per affine term
    ev_r: DMatrix<Complex64>,
    av_r: Vec<(Coefficient, DMatrix<Complex64>)>,
    bv_r: Vec<(Coefficient, DMatrix<Complex64>)>,
    edu_r: DMatrix<Complex64>,
    adu_r: Vec<(Coefficient, DMatrix<Complex64>)>,
    cdu_r: Vec<(Coefficient, DMatrix<Complex64>)>,
    ee_r: DMatrix<Complex64>,
    ae_r: Vec<(Coefficient, DMatrix<Complex64>)>,
    // propagated tall blocks for residuals
    e_v: DMatrix<Complex64>,
    a_v: Vec<(Coefficient, DMatrix<Complex64>)>,
    et_vdu: DMatrix<Complex64>,
    at_vdu: Vec<(Coefficient, DMatrix<Complex64>)>,
}

pub struct DenseEstimate {
    pub term1: DMatrix<f64>,
    pub term2: DMatrix<f64>,
    /// Magnitude of the quantities cancelled while forming the primal
    /// residual, times the norms it is paired with.  Rounding noise in
    /// either evaluation route is proportional to machine epsilon times
    /// this, which dominates the entries once a reducer has converged.
    pub cancellation_scale: f64,
}

impl DenseEstimate {
    pub fn entries(&self) -> DMatrix<f64> {
        &self.term1 + &self.term2
    }

    pub fn delta(&self) -> f64 {
        self.entries().iter().fold(0.0f64, |acc, &v| acc.max(v))
    }

    pub fn term2_max(&self) -> f64 {
        self.term2.iter().fold(0.0f64, |acc, &v| acc.max(v))
    }
}

impl DenseEstimator {
    pub fn new(
        terms: &DenseTerms,
        v: &DMatrix<f64>,
        v_du: &DMatrix<f64>,
        v_e: &DMatrix<f64>,
    ) -> Self {
        let v = to_complex(v);
        let v_du = to_complex(v_du);
        let v_e = to_complex(v_e);
        let et = terms.e.transpose();
        let project =
            |terms: &[(Coefficient, DMatrix<Complex64>)], w: &DMatrix<Complex64>, tr: bool| {
                terms
                    .iter()
                    .map(|(coeff, m)| {
                        let prop = if tr { m.tr_mul(w) } else { m * w };
                        (coeff.clone(), w.tr_mul(&prop))
                    })
                    .collect::<Vec<_>>()
            };
        let e_v = &terms.e * &v;
        let a_v: Vec<_> = terms.a.iter().map(|(c, m)| (c.clone(), m * &v)).collect();
        let et_vdu = &et * &v_du;
        let at_vdu: Vec<_> = terms
            .a
            .iter()
            .map(|(c, m)| (c.clone(), m.tr_mul(&v_du)))
            .collect();
        DenseEstimator {
            ev_r: v.tr_mul(&e_v),
            av_r: a_v.iter().map(|(c, m)| (c.clone(), v.tr_mul(m))).collect(),
            bv_r: terms
                .b
                .iter()
                .map(|(c, m)| (c.clone(), v.tr_mul(m)))
                .collect(),
            edu_r: v_du.tr_mul(&et_vdu),
            adu_r: at_vdu
                .iter()
                .map(|(c, m)| (c.clone(), v_du.tr_mul(m)))
                .collect(),
            cdu_r: terms
                .c
                .iter()
                .map(|(c, m)| (c.clone(), (m * &v_du).transpose()))
                .collect(),
            ee_r: v_e.tr_mul(&(&et * &v_e)),
            ae_r: project(&terms.a, &v_e, true),
            e_v,
            a_v,
            et_vdu,
            at_vdu,
            v_du,
            v_e,
        }
    }

    fn pencil(
        e: &DMatrix<Complex64>,
        a: &[(Coefficient, DMatrix<Complex64>)],
        pt: &ParameterPoint,
    ) -> DMatrix<Complex64> {
        let mut out = e * pt.s;
        for (coeff, m) in a {
            out -= m * coeff.eval(pt);
        }
        out
    }

    pub fn estimate(&self, terms: &DenseTerms, pt: &ParameterPoint) -> DenseEstimate {
        // Smallest singular value and Frobenius norm of a reduced pencil,
        // used to bound how much a solve amplifies assembly rounding.
        let pencil_bounds = |m: &DMatrix<Complex64>| {
            let sv = m.clone().svd(false, false).singular_values;
            let smin = sv.iter().fold(f64::INFINITY, |acc, &v| acc.min(v));
            (smin.max(f64::MIN_POSITIVE), m.norm())
        };

        // primal reduced solve and full-size residual
        let b = terms.input(pt);
        let pencil_pr = Self::pencil(&self.ev_r, &self.av_r, pt);
        let rhs_pr = eval_terms(&self.bv_r, pt);
        let x_hat = dense_solve(&pencil_pr, &rhs_pr);
        let mut resid_scale = b.norm();
        let mut r_pr = b;
        let mut av_eval = &self.e_v * pt.s;
        let e_term = (&self.e_v * &x_hat) * pt.s;
        resid_scale += e_term.norm();
        r_pr -= e_term;
        for (coeff, m) in &self.a_v {
            let theta = coeff.eval(pt);
            av_eval -= m * theta;
            let a_term = (m * &x_hat) * theta;
            resid_scale += a_term.norm();
            r_pr += a_term;
        }

        // dual reduced solve and full-size dual residual
        let ct = terms.output(pt).transpose();
        let pencil_du = Self::pencil(&self.edu_r, &self.adu_r, pt);
        let rhs_du = eval_terms(&self.cdu_r, pt);
        let x_du_hat = dense_solve(&pencil_du, &rhs_du);
        let x_du = &self.v_du * &x_du_hat;
        let mut du_scale = ct.norm();
        let mut r_du = ct;
        let e_term_du = (&self.et_vdu * &x_du_hat) * pt.s;
        du_scale += e_term_du.norm();
        r_du -= e_term_du;
        for (coeff, m) in &self.at_vdu {
            let a_term = (m * &x_du_hat) * coeff.eval(pt);
            du_scale += a_term.norm();
            r_du += a_term;
        }

        // dual-residual correction through the error basis
        let pencil_e = Self::pencil(&self.ee_r, &self.ae_r, pt);
        let rhs_e = self.v_e.tr_mul(&r_du);
        let e_hat = dense_solve(&pencil_e, &rhs_e);
        let e_du = &self.v_e * &e_hat;

        // First-order propagation of per-route rounding: each reduced
        // solve admits relative assembly noise eps in matrix and right
        // hand side, amplified by its conditioning, and the residual
        // pairings inherit it through the evaluated operator blocks.
        let (smin_pr, nrm_pr) = pencil_bounds(&pencil_pr);
        let (smin_du, nrm_du) = pencil_bounds(&pencil_du);
        let (smin_e, nrm_e) = pencil_bounds(&pencil_e);
        let dx_hat = (nrm_pr * x_hat.norm() + rhs_pr.norm()) / smin_pr;
        let dx_du = (nrm_du * x_du.norm() + rhs_du.norm()) / smin_du;
        let de_hat = (nrm_e * e_hat.norm() + rhs_e.norm() + du_scale) / smin_e;
        let pair_norm = x_du.norm() + e_du.norm();
        let cancellation_scale = pair_norm * (resid_scale + av_eval.norm() * dx_hat)
            + r_pr.norm() * (dx_du + de_hat);

        DenseEstimate {
            term1: x_du.tr_mul(&r_pr).map(|v| v.norm()),
            term2: e_du.tr_mul(&r_pr).map(|v| v.norm()),
            cancellation_scale,
        }
    }
}

/// Textbook two-pass modified Gram--Schmidt accumulator with relative
/// deflation, the oracle counterpart of the library's basis bookkeeping.
pub struct DenseBasis(pub DMatrix<f64>);

impl DenseBasis {
    pub fn empty(n: usize) -> Self {
        DenseBasis(DMatrix::zeros(n, 0))
    }

    pub fn extend(&mut self, cols: &DMatrix<f64>) -> usize {
        let mut added = 0;
        for j in 0..cols.ncols() {
            let mut v: DVector<f64> = cols.column(j).into_owned();
            let norm0 = v.norm();
            if norm0 == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for q in 0..self.0.ncols() {
                    let qcol = self.0.column(q).into_owned();
                    let coeff = qcol.dot(&v);
                    v -= qcol * coeff;
                }
            }
            let norm = v.norm();
            if norm < DEFLATION_RTOL * norm0 {
                continue;
            }
            v /= norm;
            let r = self.0.ncols();
            self.0 = self.0.clone().resize_horizontally(r + 1, 0.0);
            self.0.column_mut(r).copy_from(&v);
            added += 1;
        }
        added
    }

    fn extend_complex_capped(
        &mut self,
        block: &DMatrix<Complex64>,
        cap: usize,
        truncated: &mut bool,
    ) {
        for j in 0..block.ncols() {
            if self.0.ncols() + 2 > cap {
                *truncated = true;
                return;
            }
            let col = block.column(j);
            let mut parts = DMatrix::zeros(block.nrows(), 2);
            for i in 0..block.nrows() {
                parts[(i, 0)] = col[i].re;
                parts[(i, 1)] = col[i].im;
            }
            self.extend(&parts);
        }
    }
}

/// Moment block at one expansion point, dense mirror of the library
/// recursion: one operator factorization, branches `[E, A_1, ..]`,
/// breadth-first levels up to `eta`, per-column orthonormalization.
pub fn dense_moment_block(
    terms: &DenseTerms,
    pt: &ParameterPoint,
    rhs: &DMatrix<Complex64>,
    eta: usize,
    transposed: bool,
    cap: usize,
) -> DMatrix<f64> {
    let a = terms.operator(pt);
    let lu = if transposed {
        a.transpose().lu()
    } else {
        a.lu()
    };
    let solve = |x: &DMatrix<Complex64>| lu.solve(x).expect("dense moment solve");
    let mut branches: Vec<&DMatrix<Complex64>> = vec![&terms.e];
    branches.extend(terms.a.iter().map(|(_, m)| m));
    let apply = |t: &DMatrix<Complex64>, x: &DMatrix<Complex64>| {
        if transposed {
            t.tr_mul(x)
        } else {
            t * x
        }
    };

    let mut basis = DenseBasis::empty(rhs.nrows());
    let mut truncated = false;
    let r0 = solve(rhs);
    basis.extend_complex_capped(&r0, cap, &mut truncated);
    let mut level = vec![r0];
    for _depth in 1..=eta {
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
                basis.extend_complex_capped(&y, cap, &mut truncated);
                next.push(y);
            }
        }
        level = next;
    }
    basis.0
}

pub struct DenseSelections {
    /// Selected (mu, mu_alpha) training indices, one pair per iteration.
    pub pairs: Vec<(usize, usize)>,
    pub r: usize,
    pub converged: bool,
}

/// Dense mirror of the fixed-set greedy loop: initial pair (first, last),
/// full-set sweep, argmax with ties to the lowest index, used points skipped,
/// the second-summand argmax excluding the primal choice.
pub fn dense_greedy(
    sys: &AffineParametricSystem,
    training: &[ParameterPoint],
    tol: f64,
    eta: usize,
    max_iters: usize,
    cap: usize,
) -> DenseSelections {
    let terms = DenseTerms::new(sys);
    let n = sys.n();
    let mut v = DenseBasis::empty(n);
    let mut v_du = DenseBasis::empty(n);
    let mut v_e = DenseBasis::empty(n);
    let mut mu_i = 0usize;
    let mut alpha_i = training.len() - 1;
    let mut used: HashSet<usize> = [mu_i].into();
    let mut pairs = Vec::new();
    let mut converged = false;

    for _iteration in 1..=max_iters {
        let mu = &training[mu_i];
        let mu_alpha = &training[alpha_i];
        let block_v = dense_moment_block(&terms, mu, &terms.input(mu), eta, false, cap);
        let block_du =
            dense_moment_block(&terms, mu, &terms.output(mu).transpose(), eta, true, cap);
        let block_e = dense_moment_block(
            &terms,
            mu_alpha,
            &terms.output(mu_alpha).transpose(),
            eta,
            true,
            cap,
        );
        let mut added = v.extend(&block_v);
        added += v_du.extend(&block_du);
        let du_cols = v_du.0.clone();
        added += v_e.extend(&du_cols);
        added += v_e.extend(&block_e);
        if added == 0 {
            break;
        }

        let estimator = DenseEstimator::new(&terms, &v.0, &v_du.0, &v_e.0);
        let estimates: Vec<DenseEstimate> = training
            .iter()
            .map(|pt| estimator.estimate(&terms, pt))
            .collect();
        let deltas: Vec<f64> = estimates.iter().map(|e| e.delta()).collect();
        let term2: Vec<f64> = estimates.iter().map(|e| e.term2_max()).collect();

        let mut chosen: Option<usize> = None;
        for i in 0..training.len() {
            if used.contains(&i) {
                continue;
            }
            if chosen.map_or(true, |b| deltas[i] > deltas[b]) {
                chosen = Some(i);
            }
        }
        let Some(chosen) = chosen else {
            break;
        };
        let mut alpha: Option<usize> = None;
        for i in 0..training.len() {
            if i == chosen {
                continue;
            }
            if alpha.map_or(true, |b| term2[i] > term2[b]) {
                alpha = Some(i);
            }
        }
        let alpha = alpha.expect("at least two training points");

        pairs.push((chosen, alpha));
        if deltas[chosen] <= tol {
            converged = true;
            break;
        }
        mu_i = chosen;
        alpha_i = alpha;
        used.insert(mu_i);
    }

    DenseSelections {
        pairs,
        r: v.0.ncols(),
        converged,
    }
}

/// Map recorded interpolation points back to training-set indices.
pub fn selection_indices(
    training: &[ParameterPoint],
    records: &[pmor::greedy::TraceRecord],
) -> Vec<(usize, usize)> {
    let index_of = |pt: &ParameterPoint| {
        training
            .iter()
            .position(|q| q.key() == pt.key())
            .expect("recorded point lies in the training set")
    };
    records
        .iter()
        .map(|rec| (index_of(&rec.mu), index_of(&rec.mu_alpha)))
        .collect()
}

pub fn random_orthonormal(rng: &mut StdRng, n: usize, r: usize) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(n, r, |_, _| rng.gen::<f64>() - 0.5);
    let qr = raw.qr();
    let q = qr.q();
    q.columns(0, r).into_owned()
}

fn random_coo(rng: &mut StdRng, rows: usize, cols: usize, scale: f64) -> CooMatrix {
    let mut coo = CooMatrix::new(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            coo.push_real(i, j, scale * (rng.gen::<f64>() - 0.5));
        }
    }
    coo
}

/// Dense random stable system: `E = I + R/(20 sqrt n)`, `A_0` diagonally
/// dominant with spectrum near -2, optional single-parameter term small
/// enough to keep the pencil nonsingular on the tested frequency range.
pub fn random_stable_system(
    seed: u64,
    n: usize,
    m: usize,
    p: usize,
    with_param: bool,
) -> AffineParametricSystem {
    let mut rng = StdRng::seed_from_u64(seed);
    let sqrt_n = (n as f64).sqrt();
    let mut e = random_coo(&mut rng, n, n, 0.05 / sqrt_n);
    for i in 0..n {
        e.push_real(i, i, 1.0);
    }
    let mut a0 = random_coo(&mut rng, n, n, 1.0 / sqrt_n);
    for i in 0..n {
        a0.push_real(i, i, -(2.0 + rng.gen::<f64>()));
    }
    let mut a_terms = vec![AffineTerm::constant(1.0, a0.to_csc())];
    let mut params = Vec::new();
    if with_param {
        a_terms.push(AffineTerm::new(
            Coefficient::Param { index: 0 },
            random_coo(&mut rng, n, n, 0.2 / sqrt_n).to_csc(),
        ));
        params.push(ParamSpec {
            name: "mu".into(),
            min: -1.0,
            max: 1.0,
        });
    }
    let b = random_coo(&mut rng, n, m, 1.0).to_csc();
    let c = random_coo(&mut rng, p, n, 1.0).to_csc();
    AffineParametricSystem::new(
        e.to_csc(),
        a_terms,
        vec![AffineTerm::constant(1.0, b)],
        vec![AffineTerm::constant(1.0, c)],
        params,
    )
    .expect("random system dimensions are consistent")
}

// Nine-point central-difference weights for derivative orders one to three.
const FD_W1: [f64; 9] = [
    1.0 / 280.0,
    -4.0 / 105.0,
    1.0 / 5.0,
    -4.0 / 5.0,
    0.0,
    4.0 / 5.0,
    -1.0 / 5.0,
    4.0 / 105.0,
    -1.0 / 280.0,
];
const FD_W2: [f64; 9] = [
    -1.0 / 560.0,
    8.0 / 315.0,
    -1.0 / 5.0,
    8.0 / 5.0,
    -205.0 / 72.0,
    8.0 / 5.0,
    -1.0 / 5.0,
    8.0 / 315.0,
    -1.0 / 560.0,
];
const FD_W3: [f64; 9] = [
    -7.0 / 240.0,
    3.0 / 10.0,
    -169.0 / 120.0,
    61.0 / 30.0,
    0.0,
    -61.0 / 30.0,
    169.0 / 120.0,
    -3.0 / 10.0,
    7.0 / 240.0,
];

/// k-th derivative of an analytic scalar function along the real direction
/// of its argument, central stencil with step `delta`.
pub fn fd_derivative<F: Fn(Complex64) -> Complex64>(
    f: F,
    s0: Complex64,
    k: usize,
    delta: f64,
) -> Complex64 {
    if k == 0 {
        return f(s0);
    }
    let w: &[f64; 9] = match k {
        1 => &FD_W1,
        2 => &FD_W2,
        3 => &FD_W3,
        _ => panic!("stencil covers derivative orders 0..=3"),
    };
    let mut acc = Complex64::ZERO;
    for (i, wi) in w.iter().enumerate() {
        if *wi == 0.0 {
            continue;
        }
        let t = (i as f64) - 4.0;
        acc += f(s0 + Complex64::new(t * delta, 0.0)) * *wi;
    }
    acc / Complex64::new(delta.powi(k as i32), 0.0)
}
