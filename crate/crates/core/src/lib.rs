//! Agent-based simulator of three coupled FX markets (EUR/USD, USD/JPY,
//! EUR/JPY) with trend-following market makers and a triangular
//! arbitrager, plus the statistics used to study how the arbitrager
//! couples the markets.

pub mod analytics;
pub mod arbitrage;
pub mod calibration;
pub mod engine;
pub mod error;
pub mod io;
pub mod lob;
pub mod market;
pub mod trend;

pub use analytics::{ConfigStats, CorrelationCurve, EcologyConfig};
pub use arbitrage::{OpportunityKind, OpportunityRecord, RiskProfile};
pub use calibration::{default_parameters, CalibrationParams};
pub use engine::{run, run_ensemble, RunArtifacts, Simulation, SimulationConfig};
pub use error::{Error, Result};
pub use lob::{MarketMakerState, MarketState, ModelVariant, Transaction, TransactionKind};
pub use market::{MarketId, PerMarket};
pub use trend::{Sign, TrendConfig, TrendScheme};
