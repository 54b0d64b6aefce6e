//! Statistics over simulated or ingested runs.

mod configs;
mod correlation;
mod ecology;
mod events;

pub use configs::{
    config_stats, episodes, opposite_state_probability, pooled_config_stats,
    same_state_probability, ConfigStats, Episode,
};
pub use correlation::{
    correlation_curve, correlation_curves, cross_correlation, lag_steps, pearson,
    pooled_cross_correlation, window_differences, CorrelationCurve, CorrelationPoint,
    CORRELATION_PAIRS, DEFAULT_OMEGA_GRID,
};
pub use ecology::{ecology_timeline, trends_from_prices, EcologyConfig};
pub use events::{
    inter_transaction_times, opportunity_type_counts, opportunity_type_fractions,
    resistance_statistic, waiting_time_distributions, waiting_times, Ccdf, TypeCounts,
    WaitingTimes,
};
