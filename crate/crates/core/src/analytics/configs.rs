//! Statistics of the ecology-configuration timeline: episodes, lifetimes,
//! appearance probabilities, transitions and pairwise state agreement.

use serde::{Deserialize, Serialize};

use super::ecology::EcologyConfig;
use crate::error::{Error, Result};
use crate::market::MarketId;

const K: usize = EcologyConfig::COUNT;

/// A maximal run of one configuration, `[start, end)` in steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Episode {
    pub config: EcologyConfig,
    pub start: usize,
    pub end: usize,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

pub fn episodes(timeline: &[EcologyConfig]) -> Vec<Episode> {
    let mut out: Vec<Episode> = Vec::new();
    for (t, &config) in timeline.iter().enumerate() {
        match out.last_mut() {
            Some(ep) if ep.config == config => ep.end = t + 1,
            _ => out.push(Episode {
                config,
                start: t,
                end: t + 1,
            }),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigStats {
    /// Share of steps spent in each configuration.
    pub appearance_probability: [f64; K],
    /// Mean episode length in seconds, over episodes not cut by the run
    /// boundaries; `None` when no such episode exists.
    pub mean_lifetime: [Option<f64>; K],
    /// All episodes, including the two boundary ones.
    pub episode_count: [usize; K],
    pub transition_counts: [[usize; K]; K],
    /// Row `i`: departures from configuration `i` normalized to one. Rows
    /// without departures are all zero.
    pub transition_matrix: [[f64; K]; K],
}

impl ConfigStats {
    pub fn transition(&self, from: EcologyConfig, to: EcologyConfig) -> f64 {
        self.transition_matrix[from.index()][to.index()]
    }

    pub fn lifetime(&self, config: EcologyConfig) -> Option<f64> {
        self.mean_lifetime[config.index()]
    }

    pub fn appearance(&self, config: EcologyConfig) -> f64 {
        self.appearance_probability[config.index()]
    }
}

pub fn config_stats(timeline: &[EcologyConfig], dt: f64) -> Result<ConfigStats> {
    pooled_config_stats(&[timeline], dt)
}

/// Statistics over independent runs: step and episode counts are summed
/// across timelines, so no transition is counted across run boundaries.
pub fn pooled_config_stats(timelines: &[&[EcologyConfig]], dt: f64) -> Result<ConfigStats> {
    if timelines.iter().all(|tl| tl.is_empty()) {
        return Err(Error::EmptySeries("configuration timeline"));
    }
    let mut steps = [0usize; K];
    let mut episode_count = [0usize; K];
    let mut interior_steps = [0usize; K];
    let mut interior_count = [0usize; K];
    let mut transition_counts = [[0usize; K]; K];
    for timeline in timelines {
        let eps = episodes(timeline);
        for (i, ep) in eps.iter().enumerate() {
            let c = ep.config.index();
            steps[c] += ep.len();
            episode_count[c] += 1;
            if i > 0 && i + 1 < eps.len() {
                interior_steps[c] += ep.len();
                interior_count[c] += 1;
            }
            if let Some(next) = eps.get(i + 1) {
                transition_counts[c][next.config.index()] += 1;
            }
        }
    }
    let total: usize = timelines.iter().map(|tl| tl.len()).sum();
    let appearance_probability = steps.map(|s| s as f64 / total as f64);
    let mut mean_lifetime = [None; K];
    for c in 0..K {
        if interior_count[c] > 0 {
            let mean_steps = interior_steps[c] as f64 / interior_count[c] as f64;
            mean_lifetime[c] = Some(mean_steps * dt);
        }
    }
    let mut transition_matrix = [[0.0; K]; K];
    for (row, counts) in transition_matrix.iter_mut().zip(&transition_counts) {
        let departures: usize = counts.iter().sum();
        if departures > 0 {
            for (p, &n) in row.iter_mut().zip(counts) {
                *p = n as f64 / departures as f64;
            }
        }
    }
    Ok(ConfigStats {
        appearance_probability,
        mean_lifetime,
        episode_count,
        transition_counts,
        transition_matrix,
    })
}

/// Fraction of steps in which the two markets share the same state.
pub fn same_state_probability(
    timeline: &[EcologyConfig],
    pair: (MarketId, MarketId),
) -> Result<f64> {
    if timeline.is_empty() {
        return Err(Error::EmptySeries("configuration timeline"));
    }
    let same = timeline
        .iter()
        .filter(|c| c.sign(pair.0) == c.sign(pair.1))
        .count();
    Ok(same as f64 / timeline.len() as f64)
}

pub fn opposite_state_probability(
    timeline: &[EcologyConfig],
    pair: (MarketId, MarketId),
) -> Result<f64> {
    if timeline.is_empty() {
        return Err(Error::EmptySeries("configuration timeline"));
    }
    let opposite = timeline
        .iter()
        .filter(|c| c.sign(pair.0) != c.sign(pair.1))
        .count();
    Ok(opposite as f64 / timeline.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(label: &str) -> EcologyConfig {
        label.parse().unwrap()
    }

    #[test]
    fn single_episode() {
        let tl = vec![cfg("+-+"); 40];
        let s = config_stats(&tl, 0.01).unwrap();
        assert_eq!(s.appearance(cfg("+-+")), 1.0);
        assert_eq!(s.episode_count[cfg("+-+").index()], 1);
        assert!(s.mean_lifetime.iter().all(Option::is_none));
        assert!(s.transition_matrix.iter().flatten().all(|&p| p == 0.0));
    }

    #[test]
    fn boundary_episodes_excluded_from_lifetimes() {
        // +++ x3, -++ x5, +++ x2, -++ x4
        let mut tl = vec![cfg("+++"); 3];
        tl.extend(vec![cfg("-++"); 5]);
        tl.extend(vec![cfg("+++"); 2]);
        tl.extend(vec![cfg("-++"); 4]);
        let s = config_stats(&tl, 0.5).unwrap();
        assert_eq!(s.lifetime(cfg("-++")), Some(2.5));
        assert_eq!(s.lifetime(cfg("+++")), Some(1.0));
        assert!((s.appearance(cfg("+++")) - 5.0 / 14.0).abs() < 1e-15);
        assert_eq!(s.transition(cfg("+++"), cfg("-++")), 1.0);
        assert_eq!(
            s.transition_counts[cfg("-++").index()][cfg("+++").index()],
            1
        );
    }

    #[test]
    fn pooling_never_links_runs() {
        let a = vec![cfg("+++"), cfg("+++"), cfg("-++")];
        let b = vec![cfg("---"), cfg("+-+"), cfg("+-+"), cfg("---")];
        let pooled = pooled_config_stats(&[&a, &b], 1.0).unwrap();
        assert_eq!(
            pooled.transition_counts[cfg("-++").index()][cfg("---").index()],
            0
        );
        assert_eq!(pooled.transition_counts.iter().flatten().sum::<usize>(), 3);
        assert_eq!(pooled.appearance(cfg("+-+")), 2.0 / 7.0);
        assert_eq!(pooled.lifetime(cfg("+-+")), Some(2.0));
        assert_eq!(pooled.lifetime(cfg("+++")), None);
        assert!(pooled_config_stats(&[&[], &[]], 1.0).is_err());
    }

    #[test]
    fn empty_timeline_errors() {
        assert!(config_stats(&[], 0.01).is_err());
        assert!(same_state_probability(&[], (MarketId::EurUsd, MarketId::UsdJpy)).is_err());
    }

    #[test]
    fn same_and_opposite_sum_to_one() {
        let tl: Vec<EcologyConfig> = (0..64)
            .map(|i| EcologyConfig::from_index(i % 8).unwrap())
            .collect();
        for (a, b) in crate::analytics::CORRELATION_PAIRS {
            let s = same_state_probability(&tl, (a, b)).unwrap();
            let o = opposite_state_probability(&tl, (a, b)).unwrap();
            assert_eq!(s, 0.5);
            assert!((s + o - 1.0).abs() < 1e-15);
        }
    }
}
