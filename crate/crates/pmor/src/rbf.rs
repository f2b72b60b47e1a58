//! Radial-basis-function interpolation of the error estimate over the
//! frequency/parameter domain.
//!
//! Coordinates are normalized per axis to [0,1] before any distance is taken
//! (log10 first when an axis spans at least two decades); the frequency axis
//! enters as |Im s|. The interpolant carries a linear tail in the parameter
//! coordinates and is fitted through a dense saddle-point solve, falling back
//! to a minimum-norm least-squares solution when that system is numerically
//! singular.

use crate::error::{Error, Result};
use crate::system::{ParameterPoint, PointKey};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Radial kernel choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    ThinPlateSpline,
    InverseMultiquadric { gamma: f64 },
}

/// Kernel value for two coordinate vectors of equal length.
pub fn kernel_eval(kernel: &KernelSpec, a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let r2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    match kernel {
        KernelSpec::ThinPlateSpline => {
            if r2 == 0.0 {
                0.0
            } else {
                // r^2 ln r written on r^2 to avoid the square root.
                0.5 * r2 * r2.ln()
            }
        }
        KernelSpec::InverseMultiquadric { gamma } => 1.0 / (1.0 + gamma * gamma * r2),
    }
}

/// One normalized axis: x -> (t(x) - offset) * scale with t = log10 or id.
/// A collapsed axis (no variation in the training data) maps to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisScale {
    pub log10: bool,
    pub offset: f64,
    pub scale: f64,
}

impl AxisScale {
    fn from_range(min: f64, max: f64) -> AxisScale {
        let use_log = min > 0.0 && max / min >= 100.0;
        if use_log {
            let (lo, hi) = (min.log10(), max.log10());
            AxisScale {
                log10: true,
                offset: lo,
                scale: 1.0 / (hi - lo),
            }
        } else if max > min {
            AxisScale {
                log10: false,
                offset: min,
                scale: 1.0 / (max - min),
            }
        } else {
            AxisScale {
                log10: false,
                offset: min,
                scale: 0.0,
            }
        }
    }

    fn apply(&self, x: f64) -> f64 {
        let t = if self.log10 { x.log10() } else { x };
        (t - self.offset) * self.scale
    }
}

/// Per-axis normalization map; axis 0 is the frequency |Im s|, the remaining
/// axes are the physical parameters in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamScaler {
    axes: Vec<AxisScale>,
}

impl ParamScaler {
    /// Raw coordinate vector of a point: [|Im s|, mu_1, .., mu_d].
    pub fn raw_coords(pt: &ParameterPoint) -> Vec<f64> {
        let mut out = Vec::with_capacity(1 + pt.dim());
        out.push(pt.s.im.abs());
        out.extend_from_slice(&pt.mu);
        out
    }

    /// Build from the min/max of the training points themselves.
    pub fn from_points(points: &[ParameterPoint]) -> Result<ParamScaler> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidArgument("scaler needs at least one point".into()))?;
        let dims = 1 + first.dim();
        let mut lo = vec![f64::INFINITY; dims];
        let mut hi = vec![f64::NEG_INFINITY; dims];
        for pt in points {
            if pt.dim() != first.dim() {
                return Err(Error::dim("scaler point", first.dim(), pt.dim()));
            }
            for (k, x) in Self::raw_coords(pt).into_iter().enumerate() {
                lo[k] = lo[k].min(x);
                hi[k] = hi[k].max(x);
            }
        }
        Ok(ParamScaler {
            axes: lo
                .into_iter()
                .zip(hi)
                .map(|(a, b)| AxisScale::from_range(a, b))
                .collect(),
        })
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn normalize(&self, pt: &ParameterPoint) -> Vec<f64> {
        let raw = Self::raw_coords(pt);
        assert_eq!(raw.len(), self.axes.len(), "scaler dimension");
        raw.iter()
            .zip(&self.axes)
            .map(|(x, ax)| ax.apply(*x))
            .collect()
    }
}

/// Transform applied to fitted values; `Log10` spreads data spanning many
/// decades and is inverted on evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueTransform {
    #[default]
    Identity,
    Log10,
}

impl ValueTransform {
    fn forward(self, v: f64) -> f64 {
        match self {
            ValueTransform::Identity => v,
            ValueTransform::Log10 => v.max(1e-300).log10(),
        }
    }

    fn inverse(self, v: f64) -> f64 {
        match self {
            ValueTransform::Identity => v,
            ValueTransform::Log10 => 10f64.powf(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RbfOptions {
    /// Add a constant monomial to the linear tail (D = d + 1).
    pub tail_constant: bool,
    /// Fit log10 of the values instead of the values themselves.
    pub log_values: bool,
}

/// Fitted interpolant `g(z) = sum_i c_i K(z, z_i) + sum_j lambda_j p_j(z)`
/// over normalized coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfSurrogate {
    kernel: KernelSpec,
    scaler: ParamScaler,
    centers: Vec<Vec<f64>>,
    c: Vec<f64>,
    lambda: Vec<f64>,
    tail_constant: bool,
    transform: ValueTransform,
    used_fallback: bool,
}

impl RbfSurrogate {
    /// Interpolate `values` at `centers`. The scaler is derived from the
    /// centers' own ranges, so the centers cover the region the surrogate is
    /// meant to describe.
    pub fn fit(
        centers: &[ParameterPoint],
        values: &[f64],
        kernel: KernelSpec,
        opts: RbfOptions,
    ) -> Result<RbfSurrogate> {
        if centers.is_empty() {
            return Err(Error::InvalidArgument("surrogate fit needs centers".into()));
        }
        if centers.len() != values.len() {
            return Err(Error::dim("surrogate values", centers.len(), values.len()));
        }
        if let KernelSpec::InverseMultiquadric { gamma } = kernel {
            if !(gamma > 0.0) {
                return Err(Error::InvalidArgument("kernel width must be positive".into()));
            }
        }
        let scaler = ParamScaler::from_points(centers)?;
        let z: Vec<Vec<f64>> = centers.iter().map(|p| scaler.normalize(p)).collect();
        for i in 0..z.len() {
            for j in 0..i {
                if z[i] == z[j] {
                    return Err(Error::InvalidArgument(format!(
                        "duplicate centers at indices {j} and {i}"
                    )));
                }
            }
        }
        let d = centers[0].dim();
        let tail_dim = d + usize::from(opts.tail_constant);
        if centers.len() < tail_dim + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} centers cannot support a tail of {} monomials",
                centers.len(),
                tail_dim
            )));
        }

        let l = z.len();
        let size = l + tail_dim;
        let mut a = DMatrix::<f64>::zeros(size, size);
        for i in 0..l {
            for j in 0..=i {
                let phi = kernel_eval(&kernel, &z[i], &z[j]);
                a[(i, j)] = phi;
                a[(j, i)] = phi;
            }
        }
        for i in 0..l {
            for (j, pj) in tail_monomials(&z[i], opts.tail_constant).into_iter().enumerate() {
                a[(i, l + j)] = pj;
                a[(l + j, i)] = pj;
            }
        }
        let transform = if opts.log_values {
            ValueTransform::Log10
        } else {
            ValueTransform::Identity
        };
        let mut rhs = DVector::<f64>::zeros(size);
        for (i, v) in values.iter().enumerate() {
            rhs[i] = transform.forward(*v);
        }

        let direct = a.clone().lu().solve(&rhs);
        let acceptable = |x: &DVector<f64>| {
            let residual = (&a * x - &rhs).norm();
            residual <= 1e-8 * (rhs.norm() + a.norm() * x.norm()).max(1e-300)
        };
        let (x, used_fallback) = match direct {
            Some(x) if acceptable(&x) => (x, false),
            _ => {
                let svd = a.clone().svd(true, true);
                let cutoff = svd.singular_values.max() * 1e-12;
                let x = svd
                    .solve(&rhs, cutoff)
                    .map_err(|m| Error::InvalidArgument(format!("surrogate fallback solve: {m}")))?;
                (x, true)
            }
        };

        Ok(RbfSurrogate {
            kernel,
            scaler,
            centers: z,
            c: x.as_slice()[..l].to_vec(),
            lambda: x.as_slice()[l..].to_vec(),
            tail_constant: opts.tail_constant,
            transform,
            used_fallback,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn scaler(&self) -> &ParamScaler {
        &self.scaler
    }

    pub fn n_centers(&self) -> usize {
        self.centers.len()
    }

    pub fn tail_len(&self) -> usize {
        self.lambda.len()
    }

    /// True when the saddle solve fell back to least squares.
    pub fn used_fallback(&self) -> bool {
        self.used_fallback
    }

    pub fn coefficients(&self) -> (&[f64], &[f64]) {
        (&self.c, &self.lambda)
    }

    pub fn eval(&self, pt: &ParameterPoint) -> f64 {
        let z = self.scaler.normalize(pt);
        let mut acc = 0.0;
        for (ci, center) in self.c.iter().zip(&self.centers) {
            acc += ci * kernel_eval(&self.kernel, &z, center);
        }
        for (li, pj) in self
            .lambda
            .iter()
            .zip(tail_monomials(&z, self.tail_constant))
        {
            acc += li * pj;
        }
        self.transform.inverse(acc)
    }

    /// The `k` non-excluded points of `fine` with the largest surrogate
    /// values; ties resolve to the lowest index. Every point of `fine` is
    /// evaluated.
    pub fn top_candidates(
        &self,
        fine: &[ParameterPoint],
        exclude: &HashSet<PointKey>,
        k: usize,
    ) -> Result<Vec<ParameterPoint>> {
        if fine.is_empty() {
            return Err(Error::InvalidArgument("candidate set is empty".into()));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("candidate count must be positive".into()));
        }
        let scores: Vec<f64> = fine.par_iter().map(|p| self.eval(p)).collect();
        Ok(select_top(fine, &scores, exclude, k))
    }
}

/// Linear tail in the parameter coordinates (the frequency axis carries no
/// monomial), optionally preceded by a constant.
fn tail_monomials(z: &[f64], with_constant: bool) -> Vec<f64> {
    let mut t = Vec::with_capacity(z.len());
    if with_constant {
        t.push(1.0);
    }
    t.extend_from_slice(&z[1..]);
    t
}

fn select_top(
    fine: &[ParameterPoint],
    scores: &[f64],
    exclude: &HashSet<PointKey>,
    k: usize,
) -> Vec<ParameterPoint> {
    let mut idx: Vec<usize> = (0..fine.len())
        .filter(|&i| !exclude.contains(&fine[i].key()))
        .collect();
    idx.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx.into_iter().take(k).map(|i| fine[i].clone()).collect()
}

/// One surrogate per transfer-function entry; selection ranks by the maximum
/// over the bank, collapsing to a single interpolant in the SISO case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateBank {
    surrogates: Vec<RbfSurrogate>,
    p: usize,
    m: usize,
}

impl SurrogateBank {
    /// Fit from per-center entrywise estimates (each `p x m`).
    pub fn fit(
        centers: &[ParameterPoint],
        entry_values: &[DMatrix<f64>],
        kernel: KernelSpec,
        opts: RbfOptions,
    ) -> Result<SurrogateBank> {
        if entry_values.len() != centers.len() {
            return Err(Error::dim("surrogate entry values", centers.len(), entry_values.len()));
        }
        let first = entry_values
            .first()
            .ok_or_else(|| Error::InvalidArgument("surrogate fit needs centers".into()))?;
        let (p, m) = first.shape();
        let mut surrogates = Vec::with_capacity(p * m);
        for i in 0..p {
            for j in 0..m {
                let values: Vec<f64> = entry_values.iter().map(|e| e[(i, j)]).collect();
                surrogates.push(RbfSurrogate::fit(centers, &values, kernel, opts)?);
            }
        }
        Ok(SurrogateBank { surrogates, p, m })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.p, self.m)
    }

    pub fn surrogates(&self) -> &[RbfSurrogate] {
        &self.surrogates
    }

    pub fn any_fallback(&self) -> bool {
        self.surrogates.iter().any(|s| s.used_fallback())
    }

    pub fn eval_max(&self, pt: &ParameterPoint) -> f64 {
        self.surrogates
            .iter()
            .map(|s| s.eval(pt))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn top_candidates(
        &self,
        fine: &[ParameterPoint],
        exclude: &HashSet<PointKey>,
        k: usize,
    ) -> Result<Vec<ParameterPoint>> {
        if fine.is_empty() {
            return Err(Error::InvalidArgument("candidate set is empty".into()));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("candidate count must be positive".into()));
        }
        let scores: Vec<f64> = fine.par_iter().map(|p| self.eval_max(p)).collect();
        Ok(select_top(fine, &scores, exclude, k))
    }
}
