//! Cross-correlation of mid-price changes at a time scale `omega`.
//!
//! Changes are taken over non-overlapping windows of `omega / dt` steps and
//! combined with the population Pearson coefficient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{MarketId, PerMarket};

/// Pair order used in every correlation report.
pub const CORRELATION_PAIRS: [(MarketId, MarketId); 3] = [
    (MarketId::UsdJpy, MarketId::EurUsd),
    (MarketId::EurUsd, MarketId::EurJpy),
    (MarketId::UsdJpy, MarketId::EurJpy),
];

/// Default grid of time scales, seconds.
pub const DEFAULT_OMEGA_GRID: [f64; 7] = [0.1, 0.5, 1.0, 5.0, 10.0, 30.0, 60.0];

/// Number of steps in `omega`, which must be a positive whole multiple of `dt`.
pub fn lag_steps(omega: f64, dt: f64) -> Result<usize> {
    if !(omega > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidTimeScale(format!(
            "omega = {omega} and dt = {dt} must both be positive"
        )));
    }
    let ratio = omega / dt;
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > 1e-6 * ratio.max(1.0) {
        return Err(Error::InvalidTimeScale(format!(
            "omega = {omega} s is not a multiple of dt = {dt} s"
        )));
    }
    Ok(k as usize)
}

/// Changes `m(j k) - m((j - 1) k)` for `j = 1, 2, ...`.
pub fn window_differences(series: &[f64], k: usize) -> Vec<f64> {
    assert!(k > 0, "window must be positive");
    series
        .iter()
        .step_by(k)
        .collect::<Vec<_>>()
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect()
}

/// Population Pearson coefficient, clamped to `[-1, 1]`. `None` when either
/// input has zero variance or fewer than two points.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let (x, y) = (&x[..n], &y[..n]);
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Correlation and number of differences used, pooling the differences of
/// several independent realizations.
pub fn pooled_cross_correlation(
    realizations: &[(&[f64], &[f64])],
    omega: f64,
    dt: f64,
) -> Result<(f64, usize)> {
    let k = lag_steps(omega, dt)?;
    let mut dx = Vec::new();
    let mut dy = Vec::new();
    for (x, y) in realizations {
        let n = x.len().min(y.len());
        if n < 3 * k {
            return Err(Error::InvalidTimeScale(format!(
                "omega = {omega} s needs at least {} samples, series has {n}",
                3 * k
            )));
        }
        dx.extend(window_differences(&x[..n], k));
        dy.extend(window_differences(&y[..n], k));
    }
    let count = dx.len();
    pearson(&dx, &dy)
        .map(|rho| (rho, count))
        .ok_or(Error::DegenerateSeries { omega })
}

pub fn cross_correlation(series_i: &[f64], series_j: &[f64], omega: f64, dt: f64) -> Result<f64> {
    pooled_cross_correlation(&[(series_i, series_j)], omega, dt).map(|(rho, _)| rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPoint {
    pub omega: f64,
    pub rho: f64,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCurve {
    pub pair: (MarketId, MarketId),
    pub points: Vec<CorrelationPoint>,
}

impl CorrelationCurve {
    /// `rho` at the grid point closest to `omega`.
    pub fn rho_at(&self, omega: f64) -> Option<f64> {
        self.points
            .iter()
            .min_by(|a, b| (a.omega - omega).abs().total_cmp(&(b.omega - omega).abs()))
            .map(|p| p.rho)
    }
}

/// Curve over `omega_grid` (strictly increasing) pooled over realizations.
pub fn correlation_curve(
    series: &[&PerMarket<Vec<f64>>],
    dt: f64,
    pair: (MarketId, MarketId),
    omega_grid: &[f64],
) -> Result<CorrelationCurve> {
    if omega_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidTimeScale(
            "omega grid must be strictly increasing".into(),
        ));
    }
    let realizations: Vec<(&[f64], &[f64])> = series
        .iter()
        .map(|s| (s[pair.0].as_slice(), s[pair.1].as_slice()))
        .collect();
    let points = omega_grid
        .iter()
        .map(|&omega| {
            let (rho, sample_count) = pooled_cross_correlation(&realizations, omega, dt)?;
            Ok(CorrelationPoint {
                omega,
                rho,
                sample_count,
            })
        })
        .collect::<Result<_>>()?;
    Ok(CorrelationCurve { pair, points })
}

/// Curves for all three pairs in [`CORRELATION_PAIRS`] order.
pub fn correlation_curves(
    series: &[&PerMarket<Vec<f64>>],
    dt: f64,
    omega_grid: &[f64],
) -> Result<Vec<CorrelationCurve>> {
    CORRELATION_PAIRS
        .iter()
        .map(|&pair| correlation_curve(series, dt, pair, omega_grid))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn walk(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = 100.0;
        (0..n)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                x += e;
                x
            })
            .collect()
    }

    #[test]
    fn lag_validation() {
        assert_eq!(lag_steps(0.1, 0.01).unwrap(), 10);
        assert_eq!(lag_steps(60.0, 0.01).unwrap(), 6000);
        assert!(lag_steps(0.015, 0.01).is_err());
        assert!(lag_steps(0.0, 0.01).is_err());
        assert!(lag_steps(0.005, 0.01).is_err());
    }

    #[test]
    fn differences_are_non_overlapping() {
        let s: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
        assert_eq!(window_differences(&s, 3), vec![9.0, 27.0, 45.0]);
    }

    #[test]
    fn self_and_mirror_correlation() {
        let x = walk(1, 5000);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        for omega in [0.1, 1.0, 5.0] {
            assert!((cross_correlation(&x, &x, omega, 0.01).unwrap() - 1.0).abs() < 1e-12);
            assert!((cross_correlation(&x, &neg, omega, 0.01).unwrap() + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn independent_walks_are_uncorrelated() {
        let x = walk(2, 100_000);
        let y = walk(3, 100_000);
        let (rho, m) = pooled_cross_correlation(&[(&x, &y)], 0.1, 0.01).unwrap();
        assert_eq!(m, 9_999);
        assert!(rho.abs() < 3.0 / (m as f64).sqrt(), "rho = {rho}");
    }

    #[test]
    fn symmetric_and_affine_invariant() {
        let x = walk(4, 4000);
        let y: Vec<f64> = walk(5, 4000)
            .iter()
            .zip(&x)
            .map(|(a, b)| a + 0.5 * b)
            .collect();
        let r = cross_correlation(&x, &y, 0.2, 0.01).unwrap();
        assert!((r - cross_correlation(&y, &x, 0.2, 0.01).unwrap()).abs() < 1e-12);
        let scaled: Vec<f64> = y.iter().map(|v| 3.5 * v - 7.0).collect();
        assert!((r - cross_correlation(&x, &scaled, 0.2, 0.01).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_short_series() {
        let flat = vec![1.0; 100];
        let x = walk(6, 100);
        assert!(matches!(
            cross_correlation(&flat, &x, 0.1, 0.01),
            Err(Error::DegenerateSeries { .. })
        ));
        assert!(matches!(
            cross_correlation(&x, &x, 0.5, 0.01),
            Err(Error::InvalidTimeScale(_))
        ));
    }

    #[test]
    fn pearson_matches_textbook_formula() {
        let x = [1.0, 2.0, 4.0, 7.0];
        let y = [2.0, 1.0, 5.0, 6.0];
        // means 3.5, 3.5; deviations (-2.5,-1.5,0.5,3.5), (-1.5,-2.5,1.5,2.5)
        let cov = (3.75 + 3.75 + 0.75 + 8.75) / 4.0;
        let vx = (6.25 + 2.25 + 0.25 + 12.25) / 4.0;
        let vy = (2.25 + 6.25 + 2.25 + 6.25) / 4.0;
        let expected = cov / (vx * vy as f64).sqrt();
        assert!((pearson(&x, &y).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn curve_rejects_unsorted_grid() {
        let s = PerMarket::from_fn(|m| walk(m.index() as u64, 1000));
        assert!(correlation_curve(&[&s], 0.01, CORRELATION_PAIRS[0], &[0.5, 0.1]).is_err());
        let c = correlation_curve(&[&s], 0.01, CORRELATION_PAIRS[0], &[0.1, 0.5]).unwrap();
        assert_eq!(c.points.len(), 2);
        assert_eq!(c.points[0].sample_count, 99);
    }
}
