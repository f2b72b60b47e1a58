//! Training, candidate, and test point construction.
//!
//! Point ordering is deterministic everywhere: grids enumerate mixed-radix
//! with the frequency axis most significant, and random subsets keep the
//! original ordering of the set they were drawn from.

use crate::error::{Error, Result};
use crate::system::ParameterPoint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// `n` logarithmically spaced values including both endpoints.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!(
            "log spacing needs 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("spacing needs at least 2 points".into()));
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect())
}

/// `n` linearly spaced values including both endpoints.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(hi > lo) {
        return Err(Error::InvalidArgument(format!(
            "linear spacing needs lo < hi, got [{lo}, {hi}]"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("spacing needs at least 2 points".into()));
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

/// Tenth-of-a-decade ladder `scale * 10^(i/10)`, `i = 0..count`.
pub fn decade_tenths(scale: f64, count: usize) -> Result<Vec<f64>> {
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument("ladder scale must be positive".into()));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("ladder needs at least 1 point".into()));
    }
    Ok((0..count)
        .map(|i| scale * 10f64.powf(i as f64 / 10.0))
        .collect())
}

/// One point per frequency at a fixed parameter vector.
pub fn frequency_sweep(freqs_hz: &[f64], mu: &[f64]) -> Vec<ParameterPoint> {
    freqs_hz
        .iter()
        .map(|f| ParameterPoint::from_frequency_hz(*f, mu.to_vec()))
        .collect()
}

/// Cartesian product of a frequency axis and per-parameter axes; the
/// frequency index varies slowest, the last parameter axis fastest.
pub fn grid(freqs_hz: &[f64], param_axes: &[Vec<f64>]) -> Result<Vec<ParameterPoint>> {
    if freqs_hz.is_empty() || param_axes.iter().any(|a| a.is_empty()) {
        return Err(Error::InvalidArgument("grid axes must be nonempty".into()));
    }
    let combos: usize = param_axes.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(freqs_hz.len() * combos);
    for f in freqs_hz {
        for c in 0..combos {
            let mut rem = c;
            let mut mu = vec![0.0; param_axes.len()];
            for (k, axis) in param_axes.iter().enumerate().rev() {
                mu[k] = axis[rem % axis.len()];
                rem /= axis.len();
            }
            out.push(ParameterPoint::from_frequency_hz(*f, mu));
        }
    }
    Ok(out)
}

/// `k` distinct points drawn with a seeded generator, returned in the order
/// they appear in `points`.
pub fn random_subset(points: &[ParameterPoint], k: usize, seed: u64) -> Result<Vec<ParameterPoint>> {
    if k == 0 || k > points.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {k} points from a set of {}",
            points.len()
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, points.len(), k).into_vec();
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| points[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_spacing_hits_endpoints_and_decades() {
        let f = log_space(1e6, 1e9, 4).unwrap();
        for (got, want) in f.iter().zip([1e6, 1e7, 1e8, 1e9]) {
            assert!((got - want).abs() <= 1e-6 * want);
        }
    }

    #[test]
    fn decade_tenths_steps_by_tenth_decades() {
        let f = decade_tenths(3.0, 11).unwrap();
        assert!((f[0] - 3.0).abs() < 1e-12);
        assert!((f[10] - 30.0).abs() < 1e-9);
        let ratio = f[1] / f[0];
        assert!((ratio - 10f64.powf(0.1)).abs() < 1e-12);
    }

    #[test]
    fn grid_orders_frequency_most_significant() {
        let pts = grid(&[1.0, 2.0], &[vec![0.1, 0.2], vec![5.0]]).unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[0].mu, vec![0.1, 5.0]);
        assert_eq!(pts[1].mu, vec![0.2, 5.0]);
        assert!((pts[0].frequency_hz() - 1.0).abs() < 1e-12);
        assert!((pts[3].frequency_hz() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn random_subset_is_seeded_and_distinct() {
        let pts = frequency_sweep(&lin_space(1.0, 100.0, 50).unwrap(), &[]);
        let a = random_subset(&pts, 10, 7).unwrap();
        let b = random_subset(&pts, 10, 7).unwrap();
        let c = random_subset(&pts, 10, 8).unwrap();
        let keys = |v: &[ParameterPoint]| v.iter().map(|p| p.key()).collect::<Vec<_>>();
        assert_eq!(keys(&a), keys(&b));
        assert_ne!(keys(&a), keys(&c));
        let mut seen = std::collections::HashSet::new();
        assert!(a.iter().all(|p| seen.insert(p.key())));
    }

    #[test]
    fn invalid_ranges_are_rejected() {
        assert!(log_space(0.0, 1.0, 3).is_err());
        assert!(lin_space(2.0, 1.0, 3).is_err());
        assert!(random_subset(&[], 1, 0).is_err());
    }
}
