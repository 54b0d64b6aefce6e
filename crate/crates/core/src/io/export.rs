//! Run exports: mid prices, correlation curves, configuration statistics,
//! the opportunity log and a manifest of the resolved configuration.
//!
//! Prices are written with 17 significant digits, so they parse back to the
//! same `f64`; correlations use 6.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::analytics::{
    config_stats, correlation_curve, same_state_probability, ConfigStats, CorrelationCurve,
    EcologyConfig, CORRELATION_PAIRS,
};
use crate::engine::{RunArtifacts, SimulationConfig};
use crate::error::{Error, Result};
use crate::market::{MarketId, PerMarket};

pub const MID_SERIES_FILE: &str = "mid_series.csv";
pub const CORRELATIONS_FILE: &str = "correlations.csv";
pub const CONFIG_STATS_FILE: &str = "config_stats.json";
pub const OPPORTUNITIES_FILE: &str = "opportunities.csv";
pub const MANIFEST_FILE: &str = "run_manifest.json";

/// Decimal rendering with `digits` significant digits and no exponent.
pub fn format_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn format_price(x: f64) -> String {
    format_significant(x, 17)
}

pub fn format_rho(x: f64) -> String {
    format_significant(x, 6)
}

/// Fixed number of decimals that represents `dt` exactly, at most 9.
fn time_decimals(dt: f64) -> usize {
    (0..=9)
        .find(|&p| {
            let scaled = dt * 10f64.powi(p as i32);
            (scaled - scaled.round()).abs() < 1e-9
        })
        .unwrap_or(9)
}

pub fn pair_label(pair: (MarketId, MarketId)) -> String {
    format!("{}-{}", pair.0.key(), pair.1.key())
}

struct Sink {
    path: PathBuf,
    out: BufWriter<File>,
}

impl Sink {
    fn create(path: PathBuf) -> Result<Self> {
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Sink {
            out: BufWriter::new(file),
            path,
        })
    }

    fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.out, "{text}").map_err(|e| Error::io(&self.path, e))
    }

    fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format {
        path: path.clone(),
        message: e.to_string(),
    })?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// Long-format mid prices: `step,seconds,market,mid`.
pub fn write_mid_series(path: &Path, series: &PerMarket<Vec<f64>>, dt: f64) -> Result<()> {
    let mut sink = Sink::create(path.to_path_buf())?;
    sink.line("step,seconds,market,mid")?;
    let decimals = time_decimals(dt);
    let len = series.0.iter().map(Vec::len).min().unwrap_or(0);
    for t in 0..len {
        let seconds = t as f64 * dt;
        for m in MarketId::ALL {
            sink.line(&format!(
                "{t},{seconds:.decimals$},{},{}",
                m.key(),
                format_price(series[m][t])
            ))?;
        }
    }
    sink.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MidSeriesTable {
    pub series: PerMarket<Vec<f64>>,
    /// Seconds between consecutive steps, when at least two steps exist.
    pub dt: Option<f64>,
}

pub fn read_mid_series(path: &Path) -> Result<MidSeriesTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let format_err = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let headers = reader
        .headers()
        .map_err(|e| format_err(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["step", "seconds", "market", "mid"] {
        return Err(format_err(format!("unexpected header {headers:?}")));
    }
    let mut series: PerMarket<Vec<f64>> = PerMarket::from_fn(|_| Vec::new());
    let mut seconds_at: Vec<(u64, f64)> = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| format_err(e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |what: &str| format_err(format!("line {line}: invalid {what}"));
        let step: u64 = row[0].parse().map_err(|_| bad("step"))?;
        let seconds: f64 = row[1].parse().map_err(|_| bad("seconds"))?;
        let market: MarketId = row[2].parse().map_err(|_| bad("market"))?;
        let mid: f64 = row[3].parse().map_err(|_| bad("mid"))?;
        let s = &mut series[market];
        if s.len() as u64 != step {
            return Err(format_err(format!(
                "line {line}: step {step} out of sequence for {market}"
            )));
        }
        s.push(mid);
        if seconds_at.len() < 2 && seconds_at.last().is_none_or(|&(t, _)| t != step) {
            seconds_at.push((step, seconds));
        }
    }
    let dt = match seconds_at.as_slice() {
        [(t0, s0), (t1, s1), ..] => Some((s1 - s0) / (t1 - t0) as f64),
        _ => None,
    };
    Ok(MidSeriesTable { series, dt })
}

/// Correlation curves for the three pairs. Time scales longer than a third
/// of the series are skipped with a warning; degenerate points are written
/// as `NaN`.
pub fn compute_correlations(
    series: &[&PerMarket<Vec<f64>>],
    dt: f64,
    omega_grid: &[f64],
) -> Result<Vec<CorrelationCurve>> {
    let shortest = series
        .iter()
        .flat_map(|s| s.0.iter().map(Vec::len))
        .min()
        .unwrap_or(0);
    let mut feasible = Vec::new();
    for &omega in omega_grid {
        let k = crate::analytics::lag_steps(omega, dt)?;
        if shortest >= 3 * k {
            feasible.push(omega);
        } else {
            warn!(
                "omega = {omega} s needs {} samples per series; skipped",
                3 * k
            );
        }
    }
    let mut curves = Vec::new();
    for pair in CORRELATION_PAIRS {
        let mut points = Vec::new();
        for &omega in &feasible {
            match correlation_curve(series, dt, pair, &[omega]) {
                Ok(mut c) => points.append(&mut c.points),
                Err(Error::DegenerateSeries { .. }) => {
                    warn!(
                        "{} has zero variance at omega = {omega} s",
                        pair_label(pair)
                    );
                    let k = crate::analytics::lag_steps(omega, dt)?;
                    let count = series
                        .iter()
                        .map(|s| (s[pair.0].len().min(s[pair.1].len()) - 1) / k)
                        .sum();
                    points.push(crate::analytics::CorrelationPoint {
                        omega,
                        rho: f64::NAN,
                        sample_count: count,
                    });
                }
                Err(e) => return Err(e),
            }
        }
        curves.push(CorrelationCurve { pair, points });
    }
    Ok(curves)
}

pub fn write_correlations(path: &Path, curves: &[CorrelationCurve]) -> Result<()> {
    let mut sink = Sink::create(path.to_path_buf())?;
    sink.line("pair,omega_seconds,rho,sample_count")?;
    for curve in curves {
        for p in &curve.points {
            sink.line(&format!(
                "{},{},{},{}",
                pair_label(curve.pair),
                p.omega,
                format_rho(p.rho),
                p.sample_count
            ))?;
        }
    }
    sink.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEntry {
    pub config: EcologyConfig,
    pub appearance_probability: f64,
    pub mean_lifetime_seconds: Option<f64>,
    pub episode_count: usize,
}

/// Serialized form of [`ConfigStats`] keyed by configuration labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigStatsReport {
    pub steps: usize,
    pub dt: f64,
    pub configs: Vec<ConfigEntry>,
    /// Row and column order of the transition matrix.
    pub transition_order: Vec<EcologyConfig>,
    pub transition_matrix: Vec<Vec<f64>>,
    pub transition_counts: Vec<Vec<usize>>,
    pub same_state_probability: BTreeMap<String, f64>,
}

impl ConfigStatsReport {
    pub fn new(stats: &ConfigStats, timeline: &[EcologyConfig], dt: f64) -> Result<Self> {
        let configs = EcologyConfig::all()
            .map(|c| ConfigEntry {
                config: c,
                appearance_probability: stats.appearance(c),
                mean_lifetime_seconds: stats.lifetime(c),
                episode_count: stats.episode_count[c.index()],
            })
            .collect();
        let mut same = BTreeMap::new();
        for pair in CORRELATION_PAIRS {
            same.insert(pair_label(pair), same_state_probability(timeline, pair)?);
        }
        Ok(ConfigStatsReport {
            steps: timeline.len(),
            dt,
            configs,
            transition_order: EcologyConfig::all().collect(),
            transition_matrix: stats.transition_matrix.iter().map(|r| r.to_vec()).collect(),
            transition_counts: stats.transition_counts.iter().map(|r| r.to_vec()).collect(),
            same_state_probability: same,
        })
    }
}

pub fn write_config_stats(
    path: &Path,
    timeline: &[EcologyConfig],
    dt: f64,
) -> Result<ConfigStatsReport> {
    let stats = config_stats(timeline, dt)?;
    let report = ConfigStatsReport::new(&stats, timeline, dt)?;
    write_json(path.to_path_buf(), &report)?;
    Ok(report)
}

pub fn write_opportunities(path: &Path, artifacts: &RunArtifacts) -> Result<()> {
    let mut sink = Sink::create(path.to_path_buf())?;
    sink.line("step,kind,mu,config")?;
    for o in &artifacts.opportunities {
        sink.line(&format!(
            "{},{},{},{}",
            o.step_index,
            o.kind.label(),
            format_price(o.mu),
            o.config_at_emergence.label()
        ))?;
    }
    sink.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub seed: u64,
    pub steps: u64,
    pub omega_grid: Vec<f64>,
    pub config: SimulationConfig,
}

pub fn write_manifest(path: &Path, config: &SimulationConfig, omega_grid: &[f64]) -> Result<()> {
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        steps: config.steps,
        omega_grid: omega_grid.to_vec(),
        config: config.clone(),
    };
    write_json(path.to_path_buf(), &manifest)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Writes all five files into `dir`, creating it if needed.
pub fn export_artifacts(artifacts: &RunArtifacts, dir: &Path, omega_grid: &[f64]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let dt = artifacts.dt();
    write_mid_series(&dir.join(MID_SERIES_FILE), &artifacts.mid_series, dt)?;
    let curves = compute_correlations(&[&artifacts.mid_series], dt, omega_grid)?;
    write_correlations(&dir.join(CORRELATIONS_FILE), &curves)?;
    write_config_stats(&dir.join(CONFIG_STATS_FILE), &artifacts.config_timeline, dt)?;
    write_opportunities(&dir.join(OPPORTUNITIES_FILE), artifacts)?;
    write_manifest(&dir.join(MANIFEST_FILE), &artifacts.config, omega_grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_price(110.02), "110.02000000000000");
        assert_eq!(format_price(1.25), "1.2500000000000000");
        assert_eq!(format_rho(0.1234567), "0.123457");
        assert_eq!(format_rho(-0.5), "-0.500000");
        assert_eq!(format_rho(1.0), "1.00000");
        assert_eq!(format_rho(0.0), "0");
        assert_eq!(format_rho(f64::NAN), "NaN");
        for x in [1.0 / 3.0, 137.59401600000001, 1e-7, 123456.789] {
            assert_eq!(format_price(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn time_formatting() {
        assert_eq!(time_decimals(0.01), 2);
        assert_eq!(time_decimals(0.1), 1);
        assert_eq!(time_decimals(1.0), 0);
        assert_eq!(time_decimals(0.005), 3);
    }

    #[test]
    fn mid_series_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let series = PerMarket([
            vec![1.0 / 3.0, 1.25],
            vec![110.0, 110.00000000000001],
            vec![137.5, 137.49],
        ]);
        write_mid_series(&path, &series, 0.01).unwrap();
        let back = read_mid_series(&path).unwrap();
        assert_eq!(back.series, series);
        assert!((back.dt.unwrap() - 0.01).abs() < 1e-12);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("step,seconds,market,mid\n0,0.00,EURUSD,"));
    }
}
