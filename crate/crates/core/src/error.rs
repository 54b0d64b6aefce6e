use std::path::PathBuf;

use crate::market::MarketId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no makers")]
    NoMakers,

    /// Raised when matching does not converge within one round per maker.
    /// This indicates a logic bug rather than a market condition.
    #[error("unresolvable crossing in {market} after {rounds} matching rounds")]
    UnresolvableCrossing { market: MarketId, rounds: usize },

    #[error("arbitrage loop did not clear the opportunity within {iterations} executions at step {step}")]
    ArbitrageLoopGuard { step: u64, iterations: usize },

    #[error("invalid quote: {0}")]
    InvalidQuote(String),

    #[error("uniform draw {0} outside the open interval (0, 1)")]
    InvalidUniform(f64),

    #[error("degenerate series: zero variance in differences at omega = {omega} s")]
    DegenerateSeries { omega: f64 },

    #[error("empty {0}")]
    EmptySeries(&'static str),

    #[error("invalid time scale: {0}")]
    InvalidTimeScale(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("row {row}: {message}")]
    Ingest { row: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("run with seed {seed} failed: {source}")]
    Ensemble {
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
