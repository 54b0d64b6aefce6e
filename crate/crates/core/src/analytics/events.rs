//! Statistics of discrete events: opportunity types per configuration,
//! waiting-time distributions and the resistance of market states.

use serde::{Deserialize, Serialize};

use super::configs::episodes;
use super::ecology::EcologyConfig;
use crate::arbitrage::{OpportunityKind, OpportunityRecord};
use crate::engine::RunArtifacts;
use crate::lob::{Transaction, TransactionKind};
use crate::market::{MarketId, PerMarket};

const K: usize = EcologyConfig::COUNT;

/// Counts of type I and type II opportunities per configuration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TypeCounts {
    pub type_one: usize,
    pub type_two: usize,
}

impl TypeCounts {
    pub fn total(&self) -> usize {
        self.type_one + self.type_two
    }

    /// `(fraction type I, fraction type II)`, `None` without opportunities.
    pub fn fractions(&self) -> Option<(f64, f64)> {
        let n = self.total();
        (n > 0).then(|| {
            (
                self.type_one as f64 / n as f64,
                self.type_two as f64 / n as f64,
            )
        })
    }
}

pub fn opportunity_type_counts(log: &[OpportunityRecord]) -> [TypeCounts; K] {
    let mut counts = [TypeCounts::default(); K];
    for record in log {
        let c = &mut counts[record.config_at_emergence.index()];
        match record.kind {
            OpportunityKind::TypeI => c.type_one += 1,
            OpportunityKind::TypeII => c.type_two += 1,
        }
    }
    counts
}

pub fn opportunity_type_fractions(log: &[OpportunityRecord]) -> [Option<(f64, f64)>; K] {
    opportunity_type_counts(log).map(|c| c.fractions())
}

/// Empirical complementary distribution `P(X >= x)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Ccdf {
    sorted: Vec<f64>,
}

impl Ccdf {
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.retain(|x| !x.is_nan());
        samples.sort_by(f64::total_cmp);
        Ccdf { sorted: samples }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        let below = self.sorted.partition_point(|&v| v < x);
        (self.sorted.len() - below) as f64 / self.sorted.len() as f64
    }

    /// `(x, P(X >= x))` at every distinct sample value.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &x) in self.sorted.iter().enumerate() {
            if out.last().is_some_and(|&(prev, _)| prev == x) {
                continue;
            }
            out.push((x, (n - i as f64) / n));
        }
        out
    }

    pub fn max(&self) -> Option<f64> {
        self.sorted.last().copied()
    }

    pub fn mean(&self) -> Option<f64> {
        (!self.sorted.is_empty())
            .then(|| self.sorted.iter().sum::<f64>() / self.sorted.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaitingTimes {
    /// Configuration inception to its first opportunity, seconds.
    pub to_first_opportunity: [Ccdf; K],
    /// First opportunity to the next configuration change, seconds.
    pub opportunity_to_transition: [Ccdf; K],
    /// Gaps between consecutive maker-maker transactions, seconds.
    pub inter_transaction: PerMarket<Ccdf>,
}

/// Episodes starting at step 0 have no observed inception and are skipped
/// for the first distribution; the final episode has no observed
/// transition and is skipped for the second.
pub fn waiting_times(
    timeline: &[EcologyConfig],
    opportunities: &[OpportunityRecord],
    transactions: &[Transaction],
    dt: f64,
) -> WaitingTimes {
    let mut steps: Vec<usize> = opportunities
        .iter()
        .map(|o| o.step_index as usize)
        .collect();
    steps.sort_unstable();
    let mut first: [Vec<f64>; K] = Default::default();
    let mut second: [Vec<f64>; K] = Default::default();
    let eps = episodes(timeline);
    for (i, ep) in eps.iter().enumerate() {
        let k = steps.partition_point(|&s| s < ep.start);
        let Some(&hit) = steps.get(k).filter(|&&s| s < ep.end) else {
            continue;
        };
        let c = ep.config.index();
        if i > 0 {
            first[c].push((hit - ep.start) as f64 * dt);
        }
        if i + 1 < eps.len() {
            second[c].push((ep.end - hit) as f64 * dt);
        }
    }
    WaitingTimes {
        to_first_opportunity: first.map(Ccdf::new),
        opportunity_to_transition: second.map(Ccdf::new),
        inter_transaction: PerMarket::from_fn(|m| {
            Ccdf::new(inter_transaction_times(transactions, m, dt))
        }),
    }
}

pub fn waiting_time_distributions(artifacts: &RunArtifacts) -> WaitingTimes {
    waiting_times(
        &artifacts.config_timeline,
        &artifacts.opportunities,
        &artifacts.transactions,
        artifacts.dt(),
    )
}

/// Gaps between consecutive maker-maker transactions of one market;
/// trades in the same step give zero gaps.
pub fn inter_transaction_times(
    transactions: &[Transaction],
    market: MarketId,
    dt: f64,
) -> Vec<f64> {
    let steps: Vec<u64> = transactions
        .iter()
        .filter(|t| t.market == market && t.kind == TransactionKind::MakerMaker)
        .map(|t| t.step_index)
        .collect();
    steps
        .windows(2)
        .map(|w| (w[1] - w[0]) as f64 * dt)
        .collect()
}

/// Mean of `|phi| / p0` at opportunity-emergence steps, per configuration
/// and market. `None` for configurations without opportunities.
pub fn resistance_statistic(
    trend_series: &PerMarket<Vec<f64>>,
    opportunities: &[OpportunityRecord],
    initial_price: &PerMarket<f64>,
) -> [Option<PerMarket<f64>>; K] {
    let mut sums = [PerMarket::splat(0.0); K];
    let mut counts = [0usize; K];
    for record in opportunities {
        let t = record.step_index as usize;
        let c = record.config_at_emergence.index();
        if MarketId::ALL.iter().any(|&m| t >= trend_series[m].len()) {
            continue;
        }
        for m in MarketId::ALL {
            sums[c][m] += trend_series[m][t].abs() / initial_price[m];
        }
        counts[c] += 1;
    }
    let mut out = [None; K];
    for c in 0..K {
        if counts[c] > 0 {
            let n = counts[c] as f64;
            out[c] = Some(sums[c].map(|_, s| s / n));
        }
    }
    out
}
