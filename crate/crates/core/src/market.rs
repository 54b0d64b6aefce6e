//! The three currency pairs of the triangle.
//!
//! EUR/JPY is always the cross of USD/JPY and EUR/USD, so the direct
//! rate should equal the product of the two others.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MarketId {
    #[serde(rename = "EUR/USD")]
    EurUsd,
    #[serde(rename = "USD/JPY")]
    UsdJpy,
    #[serde(rename = "EUR/JPY")]
    EurJpy,
}

impl MarketId {
    /// Fixed iteration order, also the storage order of every per-market array.
    pub const ALL: [MarketId; 3] = [MarketId::EurUsd, MarketId::UsdJpy, MarketId::EurJpy];

    pub const fn index(self) -> usize {
        match self {
            MarketId::EurUsd => 0,
            MarketId::UsdJpy => 1,
            MarketId::EurJpy => 2,
        }
    }

    pub const fn from_index(index: usize) -> Option<MarketId> {
        match index {
            0 => Some(MarketId::EurUsd),
            1 => Some(MarketId::UsdJpy),
            2 => Some(MarketId::EurJpy),
            _ => None,
        }
    }

    pub const fn symbol(self) -> &'static str {
        match self {
            MarketId::EurUsd => "EUR/USD",
            MarketId::UsdJpy => "USD/JPY",
            MarketId::EurJpy => "EUR/JPY",
        }
    }

    /// Compact key used in config files and CSV columns (`EURUSD`).
    pub const fn key(self) -> &'static str {
        match self {
            MarketId::EurUsd => "EURUSD",
            MarketId::UsdJpy => "USDJPY",
            MarketId::EurJpy => "EURJPY",
        }
    }

    /// The two legs that synthesize this market's implied rate.
    pub const fn others(self) -> [MarketId; 2] {
        match self {
            MarketId::EurUsd => [MarketId::UsdJpy, MarketId::EurJpy],
            MarketId::UsdJpy => [MarketId::EurUsd, MarketId::EurJpy],
            MarketId::EurJpy => [MarketId::EurUsd, MarketId::UsdJpy],
        }
    }
}

impl fmt::Display for MarketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for MarketId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let normalized: String = s
            .chars()
            .filter(|c| c.is_ascii_alphabetic())
            .map(|c| c.to_ascii_uppercase())
            .collect();
        match normalized.as_str() {
            "EURUSD" => Ok(MarketId::EurUsd),
            "USDJPY" => Ok(MarketId::UsdJpy),
            "EURJPY" => Ok(MarketId::EurJpy),
            _ => Err(format!("unknown market `{s}`")),
        }
    }
}

/// A value per market, indexed by [`MarketId`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerMarket<T>(pub [T; 3]);

impl<T> PerMarket<T> {
    pub fn from_fn(mut f: impl FnMut(MarketId) -> T) -> Self {
        PerMarket([
            f(MarketId::EurUsd),
            f(MarketId::UsdJpy),
            f(MarketId::EurJpy),
        ])
    }

    pub fn iter(&self) -> impl Iterator<Item = (MarketId, &T)> {
        MarketId::ALL.into_iter().zip(self.0.iter())
    }

    pub fn map<U>(&self, mut f: impl FnMut(MarketId, &T) -> U) -> PerMarket<U> {
        PerMarket::from_fn(|m| f(m, &self[m]))
    }
}

impl<T: Copy> PerMarket<T> {
    pub fn splat(value: T) -> Self {
        PerMarket([value; 3])
    }
}

impl<T> std::ops::Index<MarketId> for PerMarket<T> {
    type Output = T;
    fn index(&self, market: MarketId) -> &T {
        &self.0[market.index()]
    }
}

impl<T> std::ops::IndexMut<MarketId> for PerMarket<T> {
    fn index_mut(&mut self, market: MarketId) -> &mut T {
        &mut self.0[market.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_spellings() {
        for m in MarketId::ALL {
            assert_eq!(m.symbol().parse::<MarketId>().unwrap(), m);
            assert_eq!(m.key().parse::<MarketId>().unwrap(), m);
        }
        assert_eq!("usd_jpy".parse::<MarketId>().unwrap(), MarketId::UsdJpy);
        assert!("GBP/USD".parse::<MarketId>().is_err());
    }

    #[test]
    fn index_round_trip() {
        for m in MarketId::ALL {
            assert_eq!(MarketId::from_index(m.index()), Some(m));
        }
        assert_eq!(MarketId::from_index(3), None);
    }
}
