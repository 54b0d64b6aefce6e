//! Triangular arbitrage: detection, the arbitrager's predatory market
//! orders, and the risk-aware behaviors of the extended model.
//!
//! With best quotes `b`/`a` in each market the two arbitrage processes are
//!
//! ```text
//! mu1 = b(EUR/USD) * b(USD/JPY) / a(EUR/JPY)    buy EUR/JPY, sell the legs
//! mu2 = b(EUR/JPY) / (a(EUR/USD) * a(USD/JPY))  sell EUR/JPY, buy the legs
//! ```
//!
//! An opportunity exists when either exceeds `1 + zeta`, where `zeta` is zero
//! in the baseline model and an exponential draw in the extended one.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::analytics::EcologyConfig;
use crate::error::{Error, Result};
use crate::lob::{
    BestQuotes, MarketMakerState, MarketState, ModelVariant, Transaction, TransactionKind,
    ARBITRAGER_ID,
};
use crate::market::{MarketId, PerMarket};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpportunityKind {
    #[serde(rename = "I")]
    TypeI,
    #[serde(rename = "II")]
    TypeII,
}

impl OpportunityKind {
    pub fn label(self) -> &'static str {
        match self {
            OpportunityKind::TypeI => "I",
            OpportunityKind::TypeII => "II",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpportunityRecord {
    pub step_index: u64,
    pub kind: OpportunityKind,
    /// Value of the arbitrage process of `kind`; always above one.
    pub mu: f64,
    /// Whether the arbitrager traded on it.
    pub exploited: bool,
    pub config_at_emergence: EcologyConfig,
}

/// Risk parameters of the extended model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskProfile {
    /// Mean of the arbitrager's threshold draws.
    pub lambda_arbitrager: f64,
    /// Mean of the makers' threshold draws, per market.
    pub lambda_makers: PerMarket<f64>,
    /// Probability that an EUR/JPY maker pegs to the implied quotes in a step.
    pub peg_probability: f64,
}

impl RiskProfile {
    /// Profile under which the extended model behaves like the baseline.
    pub fn neutral() -> Self {
        RiskProfile {
            lambda_arbitrager: 0.0,
            lambda_makers: PerMarket::splat(0.0),
            peg_probability: 0.0,
        }
    }

    /// Arbitrager threshold 0.01, maker thresholds 0.001 and peg
    /// probability 0.01.
    pub fn reference() -> Self {
        RiskProfile {
            lambda_arbitrager: 0.01,
            lambda_makers: PerMarket::splat(0.001),
            peg_probability: 0.01,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !ok(self.lambda_arbitrager) {
            return Err(format!(
                "lambda_A must be >= 0, got {}",
                self.lambda_arbitrager
            ));
        }
        for (m, &l) in self.lambda_makers.iter() {
            if !ok(l) {
                return Err(format!("lambda_MM for {m} must be >= 0, got {l}"));
            }
        }
        if !(0.0..=1.0).contains(&self.peg_probability) {
            return Err(format!(
                "gamma must lie in [0, 1], got {}",
                self.peg_probability
            ));
        }
        Ok(())
    }
}

fn check_positive(values: &[f64]) -> Result<()> {
    for &v in values {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidQuote(format!(
                "price {v} is not strictly positive"
            )));
        }
    }
    Ok(())
}

pub fn mu_one(bid_eurusd: f64, bid_usdjpy: f64, ask_eurjpy: f64) -> Result<f64> {
    check_positive(&[bid_eurusd, bid_usdjpy, ask_eurjpy])?;
    Ok(bid_eurusd * bid_usdjpy / ask_eurjpy)
}

pub fn mu_two(bid_eurjpy: f64, ask_eurusd: f64, ask_usdjpy: f64) -> Result<f64> {
    check_positive(&[bid_eurjpy, ask_eurusd, ask_usdjpy])?;
    Ok(bid_eurjpy / (ask_eurusd * ask_usdjpy))
}

/// Both processes from the best quotes of the three markets.
pub fn arbitrage_processes(best: &PerMarket<BestQuotes>) -> Result<(f64, f64)> {
    let eu = best[MarketId::EurUsd];
    let uj = best[MarketId::UsdJpy];
    let ej = best[MarketId::EurJpy];
    Ok((
        mu_one(eu.bid, uj.bid, ej.ask)?,
        mu_two(ej.bid, eu.ask, uj.ask)?,
    ))
}

/// Strict comparison against `1 + zeta`.
pub fn detect_opportunity(mu1: f64, mu2: f64, zeta: f64) -> Option<OpportunityKind> {
    let threshold = 1.0 + zeta;
    if mu1 > threshold {
        Some(OpportunityKind::TypeI)
    } else if mu2 > threshold {
        Some(OpportunityKind::TypeII)
    } else {
        None
    }
}

/// Exponential threshold with mean `scale`; a zero scale returns zero
/// without consuming randomness.
pub fn draw_threshold<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    let unit: f64 = rng.sample(Exp1);
    scale * unit
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    /// The arbitrager lifts the best ask.
    Buy,
    /// The arbitrager hits the best bid.
    Sell,
}

fn predatory_order(
    market: &mut MarketState,
    side: Side,
    mode: ModelVariant,
    step_index: u64,
) -> Result<Transaction> {
    let best = market.best_quotes()?;
    let (maker_idx, price, kind) = match side {
        Side::Buy => (best.ask_maker, best.ask, TransactionKind::PredatoryBuy),
        Side::Sell => (best.bid_maker, best.bid, TransactionKind::PredatorySell),
    };
    let maker_id = market.makers[maker_idx].agent_id;
    match mode {
        ModelVariant::ArbitragerModel => market.makers[maker_idx].reset_to(price),
        ModelVariant::DealerModel => {
            for mm in &mut market.makers {
                mm.reset_to(price);
            }
        }
    }
    market.record_price(price);
    let (buyer_id, seller_id) = match side {
        Side::Buy => (ARBITRAGER_ID, maker_id),
        Side::Sell => (maker_id, ARBITRAGER_ID),
    };
    Ok(Transaction {
        market: market.market,
        step_index,
        price,
        buyer_id,
        seller_id,
        kind,
    })
}

/// Executes the three market orders that exploit `kind`. Each matched maker
/// moves its dealing price to its own matched quote.
pub fn execute_predatory(
    markets: &mut PerMarket<MarketState>,
    kind: OpportunityKind,
    mode: ModelVariant,
    step_index: u64,
) -> Result<[Transaction; 3]> {
    let (cross_side, leg_side) = match kind {
        OpportunityKind::TypeI => (Side::Buy, Side::Sell),
        OpportunityKind::TypeII => (Side::Sell, Side::Buy),
    };
    Ok([
        predatory_order(&mut markets[MarketId::EurJpy], cross_side, mode, step_index)?,
        predatory_order(&mut markets[MarketId::EurUsd], leg_side, mode, step_index)?,
        predatory_order(&mut markets[MarketId::UsdJpy], leg_side, mode, step_index)?,
    ])
}

/// Exposure ratios `(chi1, chi2)` of one maker against the implied rate from
/// the best quotes of the other two markets. The maker's own quote replaces
/// its market's best quote in the corresponding arbitrage process.
pub fn chi_ratios(mm: &MarketMakerState, best: &PerMarket<BestQuotes>) -> Result<(f64, f64)> {
    let (bid, ask) = mm.quotes();
    check_positive(&[bid, ask])?;
    let eu = best[MarketId::EurUsd];
    let uj = best[MarketId::UsdJpy];
    let ej = best[MarketId::EurJpy];
    match mm.market {
        MarketId::EurJpy => Ok((mu_one(eu.bid, uj.bid, ask)?, mu_two(bid, eu.ask, uj.ask)?)),
        MarketId::UsdJpy => Ok((mu_one(eu.bid, bid, ej.ask)?, mu_two(ej.bid, eu.ask, ask)?)),
        MarketId::EurUsd => Ok((mu_one(bid, uj.bid, ej.ask)?, mu_two(ej.bid, ask, uj.ask)?)),
    }
}

/// Moves an exposed maker to the market mid, replacing its regular update.
pub fn mm_defensive_reset(mm: &mut MarketMakerState, mid: f64) {
    mm.reset_to(mid);
}

/// Pegs an EUR/JPY maker to the implied best quotes. The dealing price
/// follows the pegged mid so the maker resumes from there once unpegged.
pub fn peg_to_implied(mm: &mut MarketMakerState, eurusd: &BestQuotes, usdjpy: &BestQuotes) {
    let bid = eurusd.bid * usdjpy.bid;
    let ask = eurusd.ask * usdjpy.ask;
    mm.dealing_price = 0.5 * (bid + ask);
    mm.quote_override = Some((bid, ask));
}
