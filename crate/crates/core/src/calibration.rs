//! Model initialization and the parameter relations tying simulation time
//! to real time.
//!
//! Initial dealing prices are drawn around a center of mass `p0` from the
//! triangular profile `psi(r) = (2/L)(1 - |2r/L|)` on `|r| <= L/2`, which is
//! the stable shape of a book whose makers reset to the transaction price.
//! The mean time between maker-maker transactions is `L^2 / (2 N sigma^2)`;
//! `sigma` is derived from a common target time `gamma` for every market.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{MarketId, PerMarket};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationParams {
    /// Initial center of mass `p0`.
    pub initial_price: PerMarket<f64>,
    /// Market-making spread `L`.
    pub spread: PerMarket<f64>,
    /// Number of makers `N`.
    pub makers: PerMarket<usize>,
    /// Target mean time between transactions, seconds.
    pub gamma: f64,
    /// Simulation time step, seconds.
    pub dt: f64,
    /// Trend-following strength `c`, per market.
    pub trend_strength: PerMarket<f64>,
}

impl CalibrationParams {
    /// Volatility of dealing-price updates, `L / sqrt(2 N gamma)`.
    pub fn sigma(&self, market: MarketId) -> f64 {
        sigma_from_gamma(self.spread[market], self.makers[market], self.gamma)
    }

    pub fn sigmas(&self) -> PerMarket<f64> {
        PerMarket::from_fn(|m| self.sigma(m))
    }

    /// Dimensionless trend strength `1 / (c gamma)`.
    pub fn normalized_trend_threshold(&self, market: MarketId) -> f64 {
        1.0 / (self.trend_strength[market] * self.gamma)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        for m in MarketId::ALL {
            if !(self.initial_price[m] > 0.0) {
                return Err(format!("p0 for {m} must be positive"));
            }
            if !(self.spread[m] > 0.0) {
                return Err(format!("L for {m} must be positive"));
            }
            if self.makers[m] < 2 {
                return Err(format!("N must be ≥ 2 (got {} for {m})", self.makers[m]));
            }
            if !self.trend_strength[m].is_finite() {
                return Err(format!("c for {m} must be finite"));
            }
        }
        if !(self.gamma > 0.0) {
            return Err("Gamma must be positive".into());
        }
        if !(self.dt > 0.0) {
            return Err("dt must be positive".into());
        }
        Ok(())
    }
}

/// Reference parametrization: spreads proportional to `p0`, a common
/// `gamma = 0.7 s`, `dt = 0.01 s`, `c = 0.8` and `N = (50, 35, 25)`.
pub fn default_parameters() -> CalibrationParams {
    let initial_price = PerMarket([1.25, 110.0, 137.5]);
    let base_spread = 0.05;
    let spread =
        PerMarket::from_fn(|m| base_spread * (initial_price[m] / initial_price[MarketId::EurUsd]));
    CalibrationParams {
        initial_price,
        spread,
        makers: PerMarket([50, 35, 25]),
        gamma: 0.7,
        dt: 0.01,
        trend_strength: PerMarket::splat(0.8),
    }
}

pub fn sigma_from_gamma(spread: f64, makers: usize, gamma: f64) -> f64 {
    spread / (2.0 * makers as f64 * gamma).sqrt()
}

pub fn gamma_theoretical(spread: f64, makers: usize, sigma: f64) -> f64 {
    spread * spread / (2.0 * makers as f64 * sigma * sigma)
}

pub fn steps_to_seconds(steps: u64, dt: f64) -> f64 {
    steps as f64 * dt
}

/// Inverse-CDF draw of an initial dealing price from `u` in `(0, 1)`.
pub fn sample_initial_dealing_price(u: f64, spread: f64, center: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidUniform(u));
    }
    let half = 0.5 * spread;
    let r = if u <= 0.5 {
        half * ((2.0 * u).sqrt() - 1.0)
    } else {
        half * (1.0 - (2.0 * (1.0 - u)).sqrt())
    };
    Ok(center + r)
}

pub fn triangular_density(r: f64, spread: f64) -> f64 {
    if r.abs() <= 0.5 * spread {
        (2.0 / spread) * (1.0 - (2.0 * r / spread).abs())
    } else {
        0.0
    }
}

/// CDF of the triangular profile.
pub fn triangular_cdf(r: f64, spread: f64) -> f64 {
    let half = 0.5 * spread;
    if r <= -half {
        0.0
    } else if r <= 0.0 {
        (spread + 2.0 * r).powi(2) / (2.0 * spread * spread)
    } else if r < half {
        1.0 - (spread - 2.0 * r).powi(2) / (2.0 * spread * spread)
    } else {
        1.0
    }
}
