//! Price-trend signal computed from recent transaction-price changes.
//!
//! Changes are always passed most recent first: index 0 is
//! `p(g) - p(g-1)`, index 1 is `p(g-1) - p(g-2)`, and so on. Before a full
//! window of `n` changes exists, the weights are renormalized over the
//! changes that are available; with no changes the trend is zero.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendScheme {
    /// Weights `exp(-k / xi)`, used by the arbitrager model.
    Exponential,
    /// Weights proportional to `n - k`, used by the dealer model baseline.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendConfig {
    /// Number of price changes in the window.
    pub window: usize,
    /// Scale of the exponential weights (ignored by the linear scheme).
    pub scale: f64,
    pub scheme: TrendScheme,
}

impl Default for TrendConfig {
    fn default() -> Self {
        TrendConfig {
            window: 15,
            scale: 5.0,
            scheme: TrendScheme::Exponential,
        }
    }
}

impl TrendConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.window == 0 {
            return Err("trend window n must be at least 1".into());
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(format!(
                "trend scale xi must be positive, got {}",
                self.scale
            ));
        }
        Ok(())
    }
}

/// Precomputed, unnormalized weights for one [`TrendConfig`].
#[derive(Debug, Clone)]
pub struct TrendKernel {
    weights: Vec<f64>,
}

impl TrendKernel {
    pub fn new(config: &TrendConfig) -> Self {
        let n = config.window;
        let weights = match config.scheme {
            TrendScheme::Exponential => {
                (0..n).map(|k| (-(k as f64) / config.scale).exp()).collect()
            }
            TrendScheme::Linear => (0..n).map(|k| (n - k) as f64).collect(),
        };
        TrendKernel { weights }
    }

    pub fn window(&self) -> usize {
        self.weights.len()
    }

    /// Weighted average of `changes` (most recent first), renormalized over
    /// the first `min(n, len)` entries.
    pub fn apply<'a>(&self, changes: impl IntoIterator<Item = &'a f64>) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (w, dp) in self.weights.iter().zip(changes) {
            num += w * dp;
            den += w;
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }
}

pub fn trend_exponential(changes: &[f64], window: usize, scale: f64) -> f64 {
    TrendKernel::new(&TrendConfig {
        window,
        scale,
        scheme: TrendScheme::Exponential,
    })
    .apply(changes)
}

pub fn trend_linear(changes: &[f64], window: usize) -> f64 {
    TrendKernel::new(&TrendConfig {
        window,
        scale: 1.0,
        scheme: TrendScheme::Linear,
    })
    .apply(changes)
}

/// Sign of a market's trend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Minus => '-',
            Sign::Plus => '+',
        }
    }
}

/// Sign of `phi`; an exact zero keeps the previous state.
pub fn market_state(phi: f64, previous: Sign) -> Sign {
    if phi > 0.0 {
        Sign::Plus
    } else if phi < 0.0 {
        Sign::Minus
    } else {
        previous
    }
}

/// Ring buffer of the most recent price changes of one market.
#[derive(Debug, Clone)]
pub struct TrendWindow {
    changes: VecDeque<f64>,
    capacity: usize,
}

impl TrendWindow {
    pub fn new(capacity: usize) -> Self {
        TrendWindow {
            changes: VecDeque::with_capacity(capacity + 1),
            capacity,
        }
    }

    pub fn push(&mut self, change: f64) {
        self.changes.push_front(change);
        self.changes.truncate(self.capacity);
    }

    pub fn len(&self) -> usize {
        self.changes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
    }

    /// Changes, most recent first.
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.changes.iter()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.changes.iter().copied().collect()
    }
}
