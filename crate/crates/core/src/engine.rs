//! Discrete-time simulation loop.
//!
//! Each step runs in a fixed order: trends from the transaction history of
//! earlier steps; pegging and defensive resets (extended model only);
//! dealing-price updates for the remaining makers; matching inside each
//! market; the arbitrage loop; and finally recording of mid prices, trends
//! and the ecology configuration.
//!
//! Randomness comes from independent ChaCha substreams of the master seed:
//! one noise stream and one decision stream per maker plus one stream for
//! the arbitrager. Turning the arbitrager or the extended behaviors on or
//! off never shifts the Gaussian draws of any maker.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::EcologyConfig;
use crate::arbitrage::{
    arbitrage_processes, chi_ratios, detect_opportunity, draw_threshold, execute_predatory,
    mm_defensive_reset, peg_to_implied, OpportunityKind, OpportunityRecord, RiskProfile,
};
use crate::calibration::{default_parameters, sample_initial_dealing_price, CalibrationParams};
use crate::error::{Error, Result};
use crate::lob::{BestQuotes, MarketState, ModelVariant, Transaction};
use crate::market::{MarketId, PerMarket};
use crate::trend::{market_state, Sign, TrendConfig, TrendKernel, TrendScheme};

/// Maximum number of predatory executions per step.
pub const MAX_ARBITRAGE_ITERATIONS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub calibration: CalibrationParams,
    pub trend: TrendConfig,
    pub steps: u64,
    pub seed: u64,
    pub arbitrager_enabled: bool,
    pub extended: Option<RiskProfile>,
    pub variant: ModelVariant,
}

impl SimulationConfig {
    /// Default parameters with the arbitrager enabled.
    pub fn new(steps: u64, seed: u64) -> Self {
        SimulationConfig {
            calibration: default_parameters(),
            trend: TrendConfig::default(),
            steps,
            seed,
            arbitrager_enabled: true,
            extended: None,
            variant: ModelVariant::ArbitragerModel,
        }
    }

    /// The dealer-model baseline: linear trend weights and market-wide
    /// resets on every transaction.
    pub fn dealer_model(steps: u64, seed: u64) -> Self {
        let mut config = SimulationConfig::new(steps, seed);
        config.variant = ModelVariant::DealerModel;
        config.trend.scheme = TrendScheme::Linear;
        config
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be at least 1".into()));
        }
        self.calibration.validate().map_err(Error::InvalidConfig)?;
        self.trend.validate().map_err(Error::InvalidConfig)?;
        if let Some(risk) = &self.extended {
            risk.validate().map_err(Error::InvalidConfig)?;
        }
        Ok(())
    }
}

/// Everything recorded by one run. Index `t` of the per-step series refers
/// to step `t`; trends and configurations are the ones in force during that
/// step, mid prices are sampled at its end.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub config: SimulationConfig,
    pub mid_series: PerMarket<Vec<f64>>,
    pub trend_series: PerMarket<Vec<f64>>,
    pub config_timeline: Vec<EcologyConfig>,
    pub transactions: Vec<Transaction>,
    pub opportunities: Vec<OpportunityRecord>,
}

impl RunArtifacts {
    pub fn steps(&self) -> usize {
        self.config_timeline.len()
    }

    pub fn dt(&self) -> f64 {
        self.config.calibration.dt
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }
}

const STREAM_NOISE: u64 = 1;
const STREAM_DECISION: u64 = 2;
const STREAM_ARBITRAGER: u64 = 3;

fn substream(master: &ChaCha8Rng, purpose: u64, market: usize, agent: usize) -> ChaCha8Rng {
    let mut rng = master.clone();
    rng.set_stream((purpose << 56) | ((market as u64) << 48) | agent as u64);
    rng
}

/// Mutable state of one run.
pub struct Simulation {
    config: SimulationConfig,
    markets: PerMarket<MarketState>,
    kernel: TrendKernel,
    sigmas: PerMarket<f64>,
    noise: PerMarket<Vec<ChaCha8Rng>>,
    decisions: PerMarket<Vec<ChaCha8Rng>>,
    arbitrager_rng: ChaCha8Rng,
    states: PerMarket<Sign>,
    step_index: u64,
    /// Kind of an opportunity seen but not yet exploited.
    open_opportunity: Option<OpportunityKind>,
    frozen: PerMarket<Vec<bool>>,
    artifacts: RunArtifacts,
}

impl Simulation {
    /// Draws initial dealing prices from each maker's noise stream.
    pub fn new(config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        let master = ChaCha8Rng::seed_from_u64(config.seed);
        let cal = config.calibration;
        let mut noise = PerMarket::from_fn(|m| {
            (0..cal.makers[m])
                .map(|i| substream(&master, STREAM_NOISE, m.index(), i))
                .collect::<Vec<_>>()
        });
        let mut markets = Vec::with_capacity(3);
        for m in MarketId::ALL {
            let mut zs = Vec::with_capacity(cal.makers[m]);
            for rng in noise[m].iter_mut() {
                let u: f64 = rng.sample(Open01);
                zs.push(sample_initial_dealing_price(
                    u,
                    cal.spread[m],
                    cal.initial_price[m],
                )?);
            }
            markets.push(MarketState::from_dealing_prices(
                m,
                &zs,
                cal.spread[m],
                config.trend.window,
            ));
        }
        let markets = PerMarket(markets.try_into().expect("three markets"));
        Self::assemble(config, markets, noise, &master)
    }

    /// Starts from explicit books instead of sampled ones.
    pub fn with_markets(config: SimulationConfig, markets: PerMarket<MarketState>) -> Result<Self> {
        config.validate()?;
        for m in MarketId::ALL {
            if markets[m].market != m {
                return Err(Error::InvalidConfig(format!(
                    "book for {} supplied in the {m} slot",
                    markets[m].market
                )));
            }
            if markets[m].makers.is_empty() {
                return Err(Error::NoMakers);
            }
        }
        let master = ChaCha8Rng::seed_from_u64(config.seed);
        let noise = PerMarket::from_fn(|m| {
            (0..markets[m].makers.len())
                .map(|i| substream(&master, STREAM_NOISE, m.index(), i))
                .collect()
        });
        Self::assemble(config, markets, noise, &master)
    }

    fn assemble(
        config: SimulationConfig,
        markets: PerMarket<MarketState>,
        noise: PerMarket<Vec<ChaCha8Rng>>,
        master: &ChaCha8Rng,
    ) -> Result<Self> {
        let decisions = PerMarket::from_fn(|m| {
            (0..markets[m].makers.len())
                .map(|i| substream(master, STREAM_DECISION, m.index(), i))
                .collect()
        });
        let frozen = PerMarket::from_fn(|m| vec![false; markets[m].makers.len()]);
        let capacity = config.steps.min(1 << 26) as usize;
        let artifacts = RunArtifacts {
            config: config.clone(),
            mid_series: PerMarket::from_fn(|_| Vec::with_capacity(capacity)),
            trend_series: PerMarket::from_fn(|_| Vec::with_capacity(capacity)),
            config_timeline: Vec::with_capacity(capacity),
            transactions: Vec::new(),
            opportunities: Vec::new(),
        };
        Ok(Simulation {
            kernel: TrendKernel::new(&config.trend),
            sigmas: config.calibration.sigmas(),
            arbitrager_rng: substream(master, STREAM_ARBITRAGER, 0, 0),
            config,
            markets,
            noise,
            decisions,
            states: PerMarket::splat(Sign::Plus),
            step_index: 0,
            open_opportunity: None,
            frozen,
            artifacts,
        })
    }

    pub fn markets(&self) -> &PerMarket<MarketState> {
        &self.markets
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    /// Number of completed steps.
    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn artifacts(&self) -> &RunArtifacts {
        &self.artifacts
    }

    pub fn into_artifacts(self) -> RunArtifacts {
        self.artifacts
    }

    fn best_quotes(&self) -> Result<PerMarket<BestQuotes>> {
        Ok(PerMarket([
            self.markets[MarketId::EurUsd].best_quotes()?,
            self.markets[MarketId::UsdJpy].best_quotes()?,
            self.markets[MarketId::EurJpy].best_quotes()?,
        ]))
    }

    /// Advances the simulation by one time step.
    pub fn step(&mut self) -> Result<()> {
        let t = self.step_index;
        let cal = self.config.calibration;

        // (1) trends from the history of earlier steps
        let phi = PerMarket::from_fn(|m| self.kernel.apply(self.markets[m].trend_window().iter()));
        for m in MarketId::ALL {
            self.states[m] = market_state(phi[m], self.states[m]);
        }
        let config = EcologyConfig::from_signs(&self.states);

        // (2) pegging and defensive resets
        if let Some(risk) = self.config.extended {
            self.risk_behaviors(&risk)?;
        }

        // (3) dealing-price updates; every maker consumes one draw
        for m in MarketId::ALL {
            let market = &mut self.markets[m];
            let frozen = &mut self.frozen[m];
            for ((mm, rng), skip) in market
                .makers
                .iter_mut()
                .zip(self.noise[m].iter_mut())
                .zip(frozen.iter_mut())
            {
                let eps: f64 = rng.sample(StandardNormal);
                if *skip {
                    *skip = false;
                } else {
                    mm.apply_dealing_update(
                        phi[m],
                        eps,
                        cal.dt,
                        cal.trend_strength[m],
                        self.sigmas[m],
                    );
                }
            }
        }

        // (4) matching inside each market
        for m in MarketId::ALL {
            self.markets[m].match_and_settle_into(
                self.config.variant,
                t,
                &mut self.artifacts.transactions,
            )?;
        }

        // (5) arbitrage
        let best = if self.config.arbitrager_enabled {
            self.arbitrage(config)?
        } else {
            self.best_quotes()?
        };

        // (6) recording
        for m in MarketId::ALL {
            debug_assert!(best[m].bid < best[m].ask, "crossed {m} book at step {t}");
            self.artifacts.mid_series[m].push(best[m].mid());
            self.artifacts.trend_series[m].push(phi[m]);
        }
        self.artifacts.config_timeline.push(config);
        self.step_index += 1;
        Ok(())
    }

    fn risk_behaviors(&mut self, risk: &RiskProfile) -> Result<()> {
        if risk.peg_probability > 0.0 {
            let best = self.best_quotes()?;
            let ej = MarketId::EurJpy;
            for i in 0..self.markets[ej].makers.len() {
                let u: f64 = self.decisions[ej][i].random();
                if u < risk.peg_probability {
                    // Pegging is sequential only through the EUR/USD and
                    // USD/JPY quotes, which no peg changes.
                    peg_to_implied(
                        &mut self.markets[ej].makers[i],
                        &best[MarketId::EurUsd],
                        &best[MarketId::UsdJpy],
                    );
                    self.frozen[ej][i] = true;
                }
            }
        }

        // Exposure is judged on the quotes as they stand before any reset.
        let best = self.best_quotes()?;
        let mut resets = Vec::new();
        for m in MarketId::ALL {
            let scale = risk.lambda_makers[m];
            for (i, mm) in self.markets[m].makers.iter().enumerate() {
                if self.frozen[m][i] {
                    continue;
                }
                let zeta = draw_threshold(scale, &mut self.decisions[m][i]);
                let (chi1, chi2) = chi_ratios(mm, &best)?;
                if chi1 > 1.0 + zeta || chi2 > 1.0 + zeta {
                    resets.push((m, i));
                }
            }
        }
        for (m, i) in resets {
            mm_defensive_reset(&mut self.markets[m].makers[i], best[m].mid());
            self.frozen[m][i] = true;
        }
        Ok(())
    }

    /// Detect, execute, re-detect until no opportunity is left. Returns the
    /// best quotes after the last execution.
    fn arbitrage(&mut self, config: EcologyConfig) -> Result<PerMarket<BestQuotes>> {
        let t = self.step_index;
        let mut best = self.best_quotes()?;
        let (mu1, mu2) = arbitrage_processes(&best)?;
        let emerging = if mu1 > 1.0 {
            Some((OpportunityKind::TypeI, mu1))
        } else if mu2 > 1.0 {
            Some((OpportunityKind::TypeII, mu2))
        } else {
            None
        };
        let Some((kind, mu)) = emerging else {
            self.open_opportunity = None;
            return Ok(best);
        };
        let scale = self.config.extended.map_or(0.0, |r| r.lambda_arbitrager);
        let zeta = draw_threshold(scale, &mut self.arbitrager_rng);
        if self.open_opportunity != Some(kind) {
            self.artifacts.opportunities.push(OpportunityRecord {
                step_index: t,
                kind,
                mu,
                exploited: false,
                config_at_emergence: config,
            });
            self.open_opportunity = Some(kind);
        }
        let mut target = detect_opportunity(mu1, mu2, zeta);
        if target.is_none() {
            return Ok(best);
        }
        if let Some(record) = self.artifacts.opportunities.last_mut() {
            record.exploited = true;
        }
        self.open_opportunity = None;

        let mut iterations = 0;
        while let Some(kind) = target {
            if iterations == MAX_ARBITRAGE_ITERATIONS {
                return Err(Error::ArbitrageLoopGuard {
                    step: t,
                    iterations,
                });
            }
            let trades = execute_predatory(&mut self.markets, kind, self.config.variant, t)?;
            self.artifacts.transactions.extend(trades);
            iterations += 1;
            best = self.best_quotes()?;
            let (mu1, mu2) = arbitrage_processes(&best)?;
            target = detect_opportunity(mu1, mu2, zeta);
        }
        Ok(best)
    }
}

/// Runs one simulation from `config`.
pub fn run(config: &SimulationConfig) -> Result<RunArtifacts> {
    let mut sim = Simulation::new(config.clone())?;
    for _ in 0..config.steps {
        sim.step()?;
    }
    Ok(sim.into_artifacts())
}

/// Runs `config` once per seed, in parallel. Results follow `seeds` order.
pub fn run_ensemble(config: &SimulationConfig, seeds: &[u64]) -> Result<Vec<RunArtifacts>> {
    run_ensemble_with(config, seeds, true)
}

pub fn run_ensemble_with(
    config: &SimulationConfig,
    seeds: &[u64],
    parallel: bool,
) -> Result<Vec<RunArtifacts>> {
    if seeds.is_empty() {
        return Err(Error::InvalidConfig(
            "ensemble needs at least one seed".into(),
        ));
    }
    let one = |&seed: &u64| {
        let mut c = config.clone();
        c.seed = seed;
        run(&c).map_err(|e| Error::Ensemble {
            seed,
            source: Box::new(e),
        })
    };
    if parallel {
        seeds.par_iter().map(one).collect()
    } else {
        seeds.iter().map(one).collect()
    }
}
