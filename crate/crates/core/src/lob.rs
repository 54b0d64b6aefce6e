//! Market-maker quotes and intra-market matching.
//!
//! Each maker holds a single bid/ask pair on a continuous price grid,
//! centered on its dealing price with a fixed market-wide spread. A book is
//! crossed when the best bid reaches the best ask; crossings are settled
//! best-versus-best at the midpoint of the two matched quotes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::MarketId;
use crate::trend::TrendWindow;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketMakerState {
    pub agent_id: u32,
    pub market: MarketId,
    /// Dealing price `z`, the midpoint of the maker's own quotes.
    pub dealing_price: f64,
    /// Spread `L` between the maker's ask and bid.
    pub spread: f64,
    /// Explicit `(bid, ask)` used while the maker is pegged.
    pub quote_override: Option<(f64, f64)>,
}

impl MarketMakerState {
    pub fn new(agent_id: u32, market: MarketId, dealing_price: f64, spread: f64) -> Self {
        MarketMakerState {
            agent_id,
            market,
            dealing_price,
            spread,
            quote_override: None,
        }
    }

    /// `(bid, ask)`: the override pair if present, else `z -/+ L/2`.
    #[inline]
    pub fn quotes(&self) -> (f64, f64) {
        match self.quote_override {
            Some(pair) => pair,
            None => {
                let half = 0.5 * self.spread;
                (self.dealing_price - half, self.dealing_price + half)
            }
        }
    }

    #[inline]
    pub fn bid(&self) -> f64 {
        self.quotes().0
    }

    #[inline]
    pub fn ask(&self) -> f64 {
        self.quotes().1
    }

    /// Trend-following dealing-price update `z + c phi dt + sigma sqrt(dt) eps`.
    /// Clears any quote override.
    #[inline]
    pub fn apply_dealing_update(&mut self, phi: f64, eps: f64, dt: f64, c: f64, sigma: f64) {
        self.dealing_price = self.dealing_price + c * phi * dt + sigma * dt.sqrt() * eps;
        self.quote_override = None;
    }

    /// Moves the dealing price to `price` and drops any override.
    #[inline]
    pub fn reset_to(&mut self, price: f64) {
        self.dealing_price = price;
        self.quote_override = None;
    }
}

pub fn quotes(mm: &MarketMakerState) -> (f64, f64) {
    mm.quotes()
}

/// Market-wide best quotes together with the makers providing them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestQuotes {
    pub bid: f64,
    pub ask: f64,
    /// Index into [`MarketState::makers`] of the best-bid maker.
    pub bid_maker: usize,
    /// Index into [`MarketState::makers`] of the best-ask maker.
    pub ask_maker: usize,
}

impl BestQuotes {
    pub fn mid(&self) -> f64 {
        0.5 * (self.ask + self.bid)
    }

    /// Negative when the book is crossed.
    pub fn spread(&self) -> f64 {
        self.ask - self.bid
    }

    pub fn is_crossed(&self) -> bool {
        self.bid >= self.ask
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransactionKind {
    MakerMaker,
    PredatoryBuy,
    PredatorySell,
}

/// Buyer or seller id used for the arbitrager's side of a predatory trade.
pub const ARBITRAGER_ID: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transaction {
    pub market: MarketId,
    pub step_index: u64,
    pub price: f64,
    pub buyer_id: u32,
    pub seller_id: u32,
    pub kind: TransactionKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    /// Only the two matched makers move to the transaction price.
    ArbitragerModel,
    /// Every maker in the market moves to the transaction price.
    DealerModel,
}

#[derive(Debug, Clone)]
pub struct MarketState {
    pub market: MarketId,
    pub makers: Vec<MarketMakerState>,
    /// Transaction prices `p(1..=g)`, append-only.
    prices: Vec<f64>,
    trend_window: TrendWindow,
}

impl MarketState {
    pub fn new(market: MarketId, makers: Vec<MarketMakerState>, trend_window: usize) -> Self {
        MarketState {
            market,
            makers,
            prices: Vec::new(),
            trend_window: TrendWindow::new(trend_window),
        }
    }

    /// Builds a market from dealing prices, assigning agent ids in order.
    pub fn from_dealing_prices(
        market: MarketId,
        dealing_prices: &[f64],
        spread: f64,
        trend_window: usize,
    ) -> Self {
        let makers = dealing_prices
            .iter()
            .enumerate()
            .map(|(i, &z)| MarketMakerState::new(i as u32, market, z, spread))
            .collect();
        MarketState::new(market, makers, trend_window)
    }

    /// Number of transactions `g` so far.
    pub fn transaction_count(&self) -> usize {
        self.prices.len()
    }

    pub fn transaction_prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn trend_window(&self) -> &TrendWindow {
        &self.trend_window
    }

    /// Appends a transaction price and updates the window of changes.
    pub fn record_price(&mut self, price: f64) {
        if let Some(&last) = self.prices.last() {
            self.trend_window.push(price - last);
        }
        self.prices.push(price);
    }

    /// Highest bid and lowest ask; ties go to the lowest agent id.
    pub fn best_quotes(&self) -> Result<BestQuotes> {
        let mut iter = self.makers.iter().enumerate();
        let (_, first) = iter.next().ok_or(Error::NoMakers)?;
        let (b0, a0) = first.quotes();
        let mut best = BestQuotes {
            bid: b0,
            ask: a0,
            bid_maker: 0,
            ask_maker: 0,
        };
        for (i, mm) in iter {
            let (b, a) = mm.quotes();
            if b > best.bid || (b == best.bid && mm.agent_id < self.makers[best.bid_maker].agent_id)
            {
                best.bid = b;
                best.bid_maker = i;
            }
            if a < best.ask || (a == best.ask && mm.agent_id < self.makers[best.ask_maker].agent_id)
            {
                best.ask = a;
                best.ask_maker = i;
            }
        }
        Ok(best)
    }

    /// Settles the current best bid against the current best ask if the
    /// book is crossed.
    pub fn settle_best(
        &mut self,
        mode: ModelVariant,
        step_index: u64,
    ) -> Result<Option<Transaction>> {
        let best = self.best_quotes()?;
        if !best.is_crossed() {
            return Ok(None);
        }
        if best.bid_maker == best.ask_maker {
            return Err(Error::InvalidQuote(format!(
                "maker {} in {} quotes a bid at or above its own ask",
                self.makers[best.bid_maker].agent_id, self.market
            )));
        }
        let price = 0.5 * (best.ask + best.bid);
        let buyer_id = self.makers[best.bid_maker].agent_id;
        let seller_id = self.makers[best.ask_maker].agent_id;
        match mode {
            ModelVariant::ArbitragerModel => {
                self.makers[best.bid_maker].reset_to(price);
                self.makers[best.ask_maker].reset_to(price);
            }
            ModelVariant::DealerModel => {
                for mm in &mut self.makers {
                    mm.reset_to(price);
                }
            }
        }
        self.record_price(price);
        Ok(Some(Transaction {
            market: self.market,
            step_index,
            price,
            buyer_id,
            seller_id,
            kind: TransactionKind::MakerMaker,
        }))
    }

    /// Settles every crossing of the book, appending the resulting
    /// maker-maker transactions to `out`. At most one round per maker is
    /// allowed; needing more is reported as an unresolvable crossing.
    pub fn match_and_settle_into(
        &mut self,
        mode: ModelVariant,
        step_index: u64,
        out: &mut Vec<Transaction>,
    ) -> Result<usize> {
        let cap = self.makers.len();
        let mut settled = 0;
        while let Some(trade) = self.settle_best(mode, step_index)? {
            out.push(trade);
            settled += 1;
            if settled == cap && self.best_quotes()?.is_crossed() {
                return Err(Error::UnresolvableCrossing {
                    market: self.market,
                    rounds: settled,
                });
            }
        }
        Ok(settled)
    }

    pub fn match_and_settle(
        &mut self,
        mode: ModelVariant,
        step_index: u64,
    ) -> Result<Vec<Transaction>> {
        let mut out = Vec::new();
        self.match_and_settle_into(mode, step_index, &mut out)?;
        Ok(out)
    }
}
