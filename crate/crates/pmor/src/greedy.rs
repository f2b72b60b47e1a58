//! Greedy construction of the reduction bases.
//!
//! Two drivers share one iteration body: `greedy_fixed` sweeps the error
//! estimate over a fixed training set, `ipsue` sweeps only a coarse set and
//! enriches it from a fine candidate set through a surrogate of the estimate.
//! Each iteration extends the primal basis with a moment block at the current
//! expansion point, the dual basis with the transposed block at the same
//! point, and the error basis with the dual basis plus a transposed block at
//! a second, distinct point.

use crate::error::{Error, Result};
use crate::estimator::{ErrorEstimate, InnerProduct, InterpolationRecord, ReductionState};
use crate::linalg::BasisMatrix;
use crate::moment::{AssembledOperator, MomentConfig, TermWeights, DEFAULT_MAX_BLOCK_COLS};
use crate::rbf::{KernelSpec, RbfOptions, SurrogateBank};
use crate::system::{AffineParametricSystem, ParameterPoint, PointKey};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    /// Absolute tolerance on the error estimate.
    pub tol: f64,
    /// Moment-matching depth per expansion point.
    pub eta: usize,
    pub max_iters: usize,
    /// Points added to the coarse set per iteration (surrogate driver only).
    pub n_add: usize,
    /// Seed for the surrogate driver's initial point draw.
    pub seed: u64,
    pub kernel: KernelSpec,
    /// Skip previously used expansion points when selecting the next one,
    /// falling through to the next-largest estimate.
    pub skip_used: bool,
    /// Override the two initial point indices (primal, error) into the
    /// training set; defaults are first/last for the fixed driver and a
    /// seeded random pair for the surrogate driver.
    pub initial_indices: Option<(usize, usize)>,
    pub inner: InnerProduct,
    pub weights: TermWeights,
    pub max_block_cols: usize,
    /// Add a constant monomial to the surrogate tail.
    pub tail_constant: bool,
    /// Fit the surrogate through log10 of the estimate.
    pub log_surrogate: bool,
}

impl GreedyConfig {
    pub fn new(tol: f64, eta: usize) -> Self {
        GreedyConfig {
            tol,
            eta,
            max_iters: 50,
            n_add: 1,
            seed: 0,
            kernel: KernelSpec::ThinPlateSpline,
            skip_used: true,
            initial_indices: None,
            inner: InnerProduct::Unconjugated,
            weights: TermWeights::AllOnes,
            max_block_cols: DEFAULT_MAX_BLOCK_COLS,
            tail_constant: false,
            log_surrogate: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("iteration budget must be at least 1".into()));
        }
        if self.n_add == 0 {
            return Err(Error::InvalidArgument("enrichment count must be at least 1".into()));
        }
        Ok(())
    }

    fn moment_config(&self) -> MomentConfig {
        MomentConfig {
            eta: self.eta,
            max_block_cols: self.max_block_cols,
            weights: self.weights,
        }
    }

    fn rbf_options(&self) -> RbfOptions {
        RbfOptions {
            tail_constant: self.tail_constant,
            log_values: self.log_surrogate,
        }
    }
}

/// One iteration of telemetry: the points selected at its end, the estimate
/// there, basis size, active training-set size, and cumulative work counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Next primal/dual expansion point (the sweep argmax).
    pub mu: ParameterPoint,
    /// Next error-basis expansion point (argmax of the second summand).
    pub mu_alpha: ParameterPoint,
    /// Estimate at `mu` under the bases built this iteration.
    pub epsilon: f64,
    /// Primal basis size after this iteration's extension.
    pub r: usize,
    /// Training points swept this iteration (coarse-set size for the
    /// surrogate driver).
    pub ell: usize,
    /// Cumulative estimator evaluations.
    pub est_evals: usize,
    /// Cumulative surrogate evaluations.
    pub surrogate_evals: usize,
    pub wall_ms: f64,
    /// The raw argmax was an already-used point and the next-largest unused
    /// one was taken instead.
    pub selection_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub records: Vec<TraceRecord>,
    pub converged: bool,
    /// An iteration added no basis columns (everything deflated) or no
    /// unused candidate remained, so the loop stopped early.
    pub stagnated: bool,
    pub final_epsilon: f64,
    /// Some surrogate fit fell back to least squares.
    pub surrogate_fallback: bool,
}

struct Bases {
    v: BasisMatrix,
    v_du: BasisMatrix,
    v_e: BasisMatrix,
}

impl Bases {
    fn empty(n: usize) -> Self {
        Bases {
            v: BasisMatrix::empty(n),
            v_du: BasisMatrix::empty(n),
            v_e: BasisMatrix::empty(n),
        }
    }

    /// Extend all three bases at the pair of expansion points; returns the
    /// total number of columns that survived deflation.
    fn extend(
        &mut self,
        sys: &AffineParametricSystem,
        mu: &ParameterPoint,
        mu_alpha: &ParameterPoint,
        mcfg: &MomentConfig,
    ) -> Result<usize> {
        let op = AssembledOperator::new(sys, mu)?;
        let block_v = op.mmm(&sys.eval_b(mu)?, mcfg)?;
        let block_du = op.mmm_transposed(&sys.eval_c(mu)?.transpose(), mcfg)?;
        let op_alpha = AssembledOperator::new(sys, mu_alpha)?;
        let block_e = op_alpha.mmm_transposed(&sys.eval_c(mu_alpha)?.transpose(), mcfg)?;

        let mut added = self.v.extend_real(block_v.basis.as_matrix()).added;
        added += self.v_du.extend_real(block_du.basis.as_matrix()).added;
        // The error basis absorbs the updated dual basis before its own block.
        let du_cols = self.v_du.as_matrix().clone();
        added += self.v_e.extend_real(&du_cols).added;
        added += self.v_e.extend_real(block_e.basis.as_matrix()).added;
        Ok(added)
    }
}

fn validate_points(
    sys: &AffineParametricSystem,
    points: &[ParameterPoint],
    name: &str,
    min_len: usize,
) -> Result<()> {
    if points.len() < min_len {
        return Err(Error::InvalidArgument(format!(
            "{name} needs at least {min_len} points, got {}",
            points.len()
        )));
    }
    let mut seen = HashSet::with_capacity(points.len());
    for pt in points {
        sys.check_point(pt)?;
        if !seen.insert(pt.key()) {
            return Err(Error::InvalidArgument(format!("{name} contains duplicate points")));
        }
    }
    Ok(())
}

fn sweep(
    state: &ReductionState,
    sys: &AffineParametricSystem,
    points: &[ParameterPoint],
) -> Result<Vec<ErrorEstimate>> {
    points.par_iter().map(|pt| state.estimate(sys, pt)).collect()
}

/// Argmax of `score`, ties to the lowest index; with `skip_used` the search
/// ignores used points and reports whether the unrestricted argmax differed.
fn select_primary(
    points: &[ParameterPoint],
    score: &[f64],
    used: &HashSet<PointKey>,
    skip_used: bool,
) -> Option<(usize, bool)> {
    let argmax = |allow_used: bool| {
        let mut best: Option<usize> = None;
        for i in 0..points.len() {
            if !allow_used && used.contains(&points[i].key()) {
                continue;
            }
            if best.is_none_or(|b| score[i] > score[b]) {
                best = Some(i);
            }
        }
        best
    };
    let free = argmax(true).expect("nonempty training set");
    if !skip_used {
        return Some((free, false));
    }
    let chosen = argmax(false)?;
    Some((chosen, used.contains(&points[free].key())))
}

/// Argmax of `score` excluding one point; ties to the lowest index.
fn select_alpha(points: &[ParameterPoint], score: &[f64], not: &PointKey) -> usize {
    let mut best: Option<usize> = None;
    for i in 0..points.len() {
        if points[i].key() == *not {
            continue;
        }
        if best.is_none_or(|b| score[i] > score[b]) {
            best = Some(i);
        }
    }
    best.expect("training set holds at least two points")
}

struct LoopOutcome {
    state: Option<ReductionState>,
    history: Vec<InterpolationRecord>,
    trace: GreedyTrace,
}

/// The iteration body shared by both drivers. `enrich` runs after selection
/// with this iteration's estimates and may grow the training set, returning
/// the surrogate evaluations spent and whether a fit fell back.
fn drive<F>(
    sys: &AffineParametricSystem,
    training: &mut Vec<ParameterPoint>,
    cfg: &GreedyConfig,
    init: (usize, usize),
    mut enrich: F,
) -> Result<LoopOutcome>
where
    F: FnMut(&mut Vec<ParameterPoint>, &[ErrorEstimate], &GreedyConfig) -> Result<(usize, bool)>,
{
    let mcfg = cfg.moment_config();
    let (i0, a0) = init;
    let mut mu = training[i0].clone();
    let mut mu_alpha = training[a0].clone();
    let mut used: HashSet<PointKey> = [mu.key()].into();

    let mut bases = Bases::empty(sys.n());
    let mut history = Vec::new();
    let mut records: Vec<TraceRecord> = Vec::new();
    let mut est_evals = 0usize;
    let mut surrogate_evals = 0usize;
    let mut converged = false;
    let mut stagnated = false;
    let mut surrogate_fallback = false;
    let mut final_epsilon = f64::INFINITY;
    let mut state: Option<ReductionState> = None;

    for iteration in 1..=cfg.max_iters {
        let t0 = Instant::now();
        history.push(InterpolationRecord {
            iteration,
            mu: mu.clone(),
            mu_alpha: mu_alpha.clone(),
        });
        let added = bases.extend(sys, &mu, &mu_alpha, &mcfg)?;
        if added == 0 {
            stagnated = true;
            break;
        }
        let next = ReductionState::new(
            sys,
            bases.v.clone(),
            bases.v_du.clone(),
            bases.v_e.clone(),
            cfg.inner,
        )?;

        let estimates = sweep(&next, sys, training)?;
        let swept = training.len();
        est_evals += swept;
        let deltas: Vec<f64> = estimates.iter().map(|e| e.delta).collect();
        let term2: Vec<f64> = estimates.iter().map(|e| e.term2_max()).collect();

        let Some((chosen, fallback)) = select_primary(training, &deltas, &used, cfg.skip_used)
        else {
            stagnated = true;
            state = Some(next);
            break;
        };
        let epsilon = deltas[chosen];
        let alpha = select_alpha(training, &term2, &training[chosen].key());
        let next_mu = training[chosen].clone();
        let next_alpha = training[alpha].clone();

        let (spent, fell_back) = enrich(training, &estimates, cfg)?;
        surrogate_evals += spent;
        surrogate_fallback |= fell_back;

        records.push(TraceRecord {
            iteration,
            mu: next_mu.clone(),
            mu_alpha: next_alpha.clone(),
            epsilon,
            r: next.basis().n_cols(),
            ell: swept,
            est_evals,
            surrogate_evals,
            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
            selection_fallback: fallback,
        });
        final_epsilon = epsilon;
        state = Some(next);

        if epsilon <= cfg.tol {
            converged = true;
            break;
        }
        mu = next_mu;
        mu_alpha = next_alpha;
        used.insert(mu.key());
    }

    Ok(LoopOutcome {
        state,
        history,
        trace: GreedyTrace {
            records,
            converged,
            stagnated,
            final_epsilon,
            surrogate_fallback,
        },
    })
}

fn finish(sys_name: &str, outcome: LoopOutcome) -> Result<(ReductionState, GreedyTrace)> {
    let state = outcome.state.ok_or_else(|| {
        Error::InvalidArgument(format!(
            "{sys_name}: the first expansion point produced no basis columns"
        ))
    })?;
    Ok((state.with_history(outcome.history), outcome.trace))
}

/// Greedy reduction over a fixed training set: initial expansion points are
/// the first and last samples, every iteration sweeps the full set.
pub fn greedy_fixed(
    sys: &AffineParametricSystem,
    xi: &[ParameterPoint],
    cfg: &GreedyConfig,
) -> Result<(ReductionState, GreedyTrace)> {
    cfg.validate()?;
    validate_points(sys, xi, "training set", 2)?;
    let init = resolve_init(cfg, xi.len(), (0, xi.len() - 1))?;
    let mut training = xi.to_vec();
    let outcome = drive(sys, &mut training, cfg, init, |_, _, _| Ok((0, false)))?;
    finish("fixed-set reduction", outcome)
}

/// Surrogate-adaptive reduction: sweeps only the coarse set, fits a radial
/// surrogate of the estimate on it each iteration, and moves the `n_add`
/// fine-set points with the largest surrogate values into the coarse set.
/// Initial expansion points are a seeded random distinct pair.
pub fn ipsue(
    sys: &AffineParametricSystem,
    xi_coarse: &[ParameterPoint],
    xi_fine: &[ParameterPoint],
    cfg: &GreedyConfig,
) -> Result<(ReductionState, GreedyTrace)> {
    cfg.validate()?;
    validate_points(sys, xi_coarse, "coarse training set", 2)?;
    validate_points(sys, xi_fine, "fine training set", 2)?;
    if xi_fine.len() < xi_coarse.len() {
        return Err(Error::InvalidArgument(
            "fine set must be at least as large as the coarse set".into(),
        ));
    }
    let init = match cfg.initial_indices {
        Some(_) => resolve_init(cfg, xi_coarse.len(), (0, 0))?,
        None => {
            let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
            let i0 = rng.gen_range(0..xi_coarse.len());
            let a0 = loop {
                let j = rng.gen_range(0..xi_coarse.len());
                if j != i0 {
                    break j;
                }
            };
            (i0, a0)
        }
    };

    let mut coarse_keys: HashSet<PointKey> = xi_coarse.iter().map(|p| p.key()).collect();
    let mut training = xi_coarse.to_vec();
    let outcome = drive(sys, &mut training, cfg, init, |set, estimates, cfg| {
        let entries: Vec<DMatrix<f64>> = estimates.iter().map(|e| e.delta_entries()).collect();
        let bank = SurrogateBank::fit(set, &entries, cfg.kernel, cfg.rbf_options())?;
        let picked = bank.top_candidates(xi_fine, &coarse_keys, cfg.n_add)?;
        for p in picked {
            coarse_keys.insert(p.key());
            set.push(p);
        }
        Ok((xi_fine.len(), bank.any_fallback()))
    })?;
    finish("surrogate-adaptive reduction", outcome)
}

fn resolve_init(cfg: &GreedyConfig, len: usize, default: (usize, usize)) -> Result<(usize, usize)> {
    let (i0, a0) = cfg.initial_indices.unwrap_or(default);
    if i0 >= len || a0 >= len {
        return Err(Error::InvalidArgument(format!(
            "initial indices ({i0}, {a0}) outside training set of {len}"
        )));
    }
    if i0 == a0 {
        return Err(Error::InvalidArgument("initial points must be distinct".into()));
    }
    Ok((i0, a0))
}

/// Per-point accuracy report: transfer-function magnitudes, true error, and
/// the estimate, each reduced entrywise by maximum modulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub point: ParameterPoint,
    pub abs_h: f64,
    pub abs_h_hat: f64,
    pub abs_error: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationTable {
    pub rows: Vec<ValidationRow>,
}

impl ValidationTable {
    pub fn max_error(&self) -> f64 {
        self.rows.iter().fold(0.0, |a, r| a.max(r.abs_error))
    }

    pub fn max_delta(&self) -> f64 {
        self.rows.iter().fold(0.0, |a, r| a.max(r.delta))
    }

    pub fn median_error(&self) -> f64 {
        median(self.rows.iter().map(|r| r.abs_error).collect())
    }

    pub fn median_delta(&self) -> f64 {
        median(self.rows.iter().map(|r| r.delta).collect())
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Evaluate full and reduced transfer functions plus the estimate over a
/// test set.
pub fn validate(
    state: &ReductionState,
    sys: &AffineParametricSystem,
    xi_test: &[ParameterPoint],
) -> Result<ValidationTable> {
    validate_points(sys, xi_test, "test set", 1)?;
    let rows = xi_test
        .par_iter()
        .map(|pt| {
            let h = sys.transfer_function(pt)?;
            let h_hat = state.rom_transfer(pt)?;
            let est = state.estimate(sys, pt)?;
            let diff = &h - &h_hat;
            Ok(ValidationRow {
                point: pt.clone(),
                abs_h: crate::linalg::max_modulus(&h),
                abs_h_hat: crate::linalg::max_modulus(&h_hat),
                abs_error: crate::linalg::max_modulus(&diff),
                delta: est.delta,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ValidationTable { rows })
}
