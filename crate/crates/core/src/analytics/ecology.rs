//! Ecology configurations: the joint sign of the three market trends.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::market::{MarketId, PerMarket};
use crate::trend::{market_state, Sign, TrendConfig, TrendKernel, TrendWindow};

/// One of the 8 sign triples `(EUR/USD, USD/JPY, EUR/JPY)`.
///
/// The index enumerates configurations in the order
/// `+++, -++, +-+, --+, ++-, -+-, +--, ---`: bit `k` is set when market `k`
/// is in the `-` state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EcologyConfig(u8);

impl EcologyConfig {
    pub const COUNT: usize = 8;

    pub fn all() -> impl Iterator<Item = EcologyConfig> {
        (0..Self::COUNT as u8).map(EcologyConfig)
    }

    pub fn from_index(index: usize) -> Option<Self> {
        (index < Self::COUNT).then_some(EcologyConfig(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_signs(signs: &PerMarket<Sign>) -> Self {
        let mut bits = 0u8;
        for (m, s) in signs.iter() {
            if *s == Sign::Minus {
                bits |= 1 << m.index();
            }
        }
        EcologyConfig(bits)
    }

    pub fn sign(self, market: MarketId) -> Sign {
        if self.0 & (1 << market.index()) != 0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn signs(self) -> PerMarket<Sign> {
        PerMarket::from_fn(|m| self.sign(m))
    }

    /// Compact label such as `+-+`.
    pub fn label(self) -> String {
        MarketId::ALL
            .iter()
            .map(|&m| self.sign(m).symbol())
            .collect()
    }
}

impl fmt::Display for EcologyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.signs();
        write!(
            f,
            "{{{},{},{}}}",
            s[MarketId::EurUsd].symbol(),
            s[MarketId::UsdJpy].symbol(),
            s[MarketId::EurJpy].symbol()
        )
    }
}

impl FromStr for EcologyConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let symbols: Vec<char> = s.chars().filter(|c| *c == '+' || *c == '-').collect();
        if symbols.len() != 3 {
            return Err(format!("invalid ecology configuration `{s}`"));
        }
        let signs = PerMarket::from_fn(|m| {
            if symbols[m.index()] == '-' {
                Sign::Minus
            } else {
                Sign::Plus
            }
        });
        Ok(EcologyConfig::from_signs(&signs))
    }
}

impl Serialize for EcologyConfig {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for EcologyConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-step configuration from per-market trend series. Zero trends keep
/// the previous sign; the state before the first step is `+`.
pub fn ecology_timeline(trends: &PerMarket<Vec<f64>>) -> Vec<EcologyConfig> {
    let len = trends.0.iter().map(Vec::len).min().unwrap_or(0);
    let mut state = PerMarket::splat(Sign::Plus);
    (0..len)
        .map(|t| {
            for m in MarketId::ALL {
                state[m] = market_state(trends[m][t], state[m]);
            }
            EcologyConfig::from_signs(&state)
        })
        .collect()
}

/// Trend series of observed prices: the value at step `t` weights the
/// nonzero price changes before `t`. Repeated prices on a sampling grid are
/// not price events and leave the window unchanged.
pub fn trends_from_prices(
    prices: &PerMarket<Vec<f64>>,
    trend: &TrendConfig,
) -> PerMarket<Vec<f64>> {
    let kernel = TrendKernel::new(trend);
    prices.map(|_, series| {
        let mut window = TrendWindow::new(kernel.window());
        let mut out = Vec::with_capacity(series.len());
        for (t, &p) in series.iter().enumerate() {
            out.push(kernel.apply(window.iter()));
            if let Some(&prev) = t.checked_sub(1).and_then(|i| series.get(i)) {
                if p != prev {
                    window.push(p - prev);
                }
            }
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trends_from_prices_skip_flat_steps() {
        let trend = TrendConfig::default();
        let prices = PerMarket::from_fn(|_| vec![1.0, 1.0, 2.0, 2.0, 2.0, 1.5]);
        let phi = trends_from_prices(&prices, &trend);
        // window is empty through step 2, then holds the +1 change only
        assert_eq!(&phi[MarketId::EurUsd][..3], &[0.0, 0.0, 0.0]);
        assert_eq!(&phi[MarketId::EurUsd][3..5], &[1.0, 1.0]);
        assert_eq!(phi[MarketId::EurUsd][5], 1.0);
        let tl = ecology_timeline(&phi);
        assert!(tl.iter().all(|c| c.label() == "+++"));
    }

    #[test]
    fn eight_distinct_configs_in_table_order() {
        let labels: Vec<String> = EcologyConfig::all().map(|c| c.label()).collect();
        assert_eq!(
            labels,
            ["+++", "-++", "+-+", "--+", "++-", "-+-", "+--", "---"]
        );
        for c in EcologyConfig::all() {
            assert_eq!(EcologyConfig::from_signs(&c.signs()), c);
            assert_eq!(c.to_string().parse::<EcologyConfig>().unwrap(), c);
        }
    }

    #[test]
    fn constant_positive_trends() {
        let trends = PerMarket::from_fn(|_| vec![0.3; 50]);
        let tl = ecology_timeline(&trends);
        assert_eq!(tl.len(), 50);
        assert!(tl.iter().all(|c| c.label() == "+++"));
    }

    #[test]
    fn single_flip_fixture() {
        let mut trends = PerMarket::from_fn(|_| vec![1.0; 200]);
        for t in 100..200 {
            trends[MarketId::UsdJpy][t] = -1.0;
        }
        let tl = ecology_timeline(&trends);
        let changes: Vec<usize> = (1..tl.len()).filter(|&t| tl[t] != tl[t - 1]).collect();
        assert_eq!(changes, vec![100]);
        assert_eq!(tl[100].label(), "+-+");
    }

    #[test]
    fn zero_trend_is_sticky() {
        let trends = PerMarket([vec![0.0, -1.0, 0.0], vec![0.0; 3], vec![0.0; 3]]);
        let labels: Vec<String> = ecology_timeline(&trends)
            .iter()
            .map(|c| c.label())
            .collect();
        assert_eq!(labels, ["+++", "-++", "-++"]);
    }
}
