//! Python bindings: configuration, runs, exports and the main analytics.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use fxarb::analytics::{
    config_stats, correlation_curves, same_state_probability, CORRELATION_PAIRS,
    DEFAULT_OMEGA_GRID,
};
use fxarb::arbitrage::{detect_opportunity, mu_one as core_mu_one, mu_two as core_mu_two};
use fxarb::calibration::sample_initial_dealing_price as core_sample;
use fxarb::io::config::parse_config;
use fxarb::io::export::{compute_correlations, export_artifacts};
use fxarb::io::ingest::ingest_records;
use fxarb::{
    Error, MarketId, ModelVariant, PerMarket, RiskProfile, RunArtifacts, SimulationConfig,
    TrendScheme,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn market(name: &str) -> PyResult<MarketId> {
    name.parse().map_err(PyValueError::new_err)
}

fn pair_name(pair: (MarketId, MarketId)) -> String {
    format!("{}-{}", pair.0.key(), pair.1.key())
}

#[pyclass(name = "SimulationConfig", module = "fxarb", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: SimulationConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (steps, seed, arbitrager=true, extended=false, variant="arbitrager", makers=None))]
    fn new(
        steps: u64,
        seed: u64,
        arbitrager: bool,
        extended: bool,
        variant: &str,
        makers: Option<(usize, usize, usize)>,
    ) -> PyResult<Self> {
        let mut inner = match variant {
            "arbitrager" => SimulationConfig::new(steps, seed),
            "dealer" => SimulationConfig::dealer_model(steps, seed),
            other => return Err(PyValueError::new_err(format!("unknown variant `{other}`"))),
        };
        inner.arbitrager_enabled = arbitrager;
        if extended {
            inner.extended = Some(RiskProfile::reference());
        }
        if let Some((a, b, c)) = makers {
            inner.calibration.makers = PerMarket([a, b, c]);
        }
        inner.validate().map_err(to_py)?;
        Ok(PyConfig { inner })
    }

    /// Parses the TOML configuration format used by the command line.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        parse_config(text).map(|inner| PyConfig { inner }).map_err(to_py)
    }

    #[getter]
    fn steps(&self) -> u64 {
        self.inner.steps
    }

    #[setter]
    fn set_steps(&mut self, steps: u64) {
        self.inner.steps = steps;
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.inner.seed = seed;
    }

    #[getter]
    fn arbitrager_enabled(&self) -> bool {
        self.inner.arbitrager_enabled
    }

    #[setter]
    fn set_arbitrager_enabled(&mut self, on: bool) {
        self.inner.arbitrager_enabled = on;
    }

    #[getter]
    fn makers(&self) -> (usize, usize, usize) {
        let n = self.inner.calibration.makers;
        (n.0[0], n.0[1], n.0[2])
    }

    #[getter]
    fn variant(&self) -> &'static str {
        match self.inner.variant {
            ModelVariant::ArbitragerModel => "arbitrager",
            ModelVariant::DealerModel => "dealer",
        }
    }

    #[getter]
    fn extended(&self) -> Option<(f64, (f64, f64, f64), f64)> {
        self.inner.extended.map(|r| {
            let mm = r.lambda_makers.0;
            (r.lambda_arbitrager, (mm[0], mm[1], mm[2]), r.peg_probability)
        })
    }

    /// Sets `(lambda_A, lambda_MM, gamma)` or disables the extended model.
    #[setter]
    fn set_extended(&mut self, value: Option<(f64, f64, f64)>) -> PyResult<()> {
        self.inner.extended = value.map(|(a, mm, g)| RiskProfile {
            lambda_arbitrager: a,
            lambda_makers: PerMarket::splat(mm),
            peg_probability: g,
        });
        self.inner.validate().map_err(to_py)
    }

    #[getter]
    fn trend_scheme(&self) -> &'static str {
        match self.inner.trend.scheme {
            TrendScheme::Exponential => "exponential",
            TrendScheme::Linear => "linear",
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "SimulationConfig(steps={}, seed={}, arbitrager={}, variant='{}', extended={})",
            self.inner.steps,
            self.inner.seed,
            self.inner.arbitrager_enabled,
            self.variant(),
            self.inner.extended.is_some()
        )
    }
}

#[pyclass(name = "RunArtifacts", module = "fxarb", frozen)]
struct PyArtifacts {
    inner: RunArtifacts,
}

#[pymethods]
impl PyArtifacts {
    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps()
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    #[getter]
    fn transaction_count(&self) -> usize {
        self.inner.transactions.len()
    }

    /// Mid price after every step, for `EURUSD`, `USDJPY` or `EURJPY`.
    fn mid_series(&self, name: &str) -> PyResult<Vec<f64>> {
        Ok(self.inner.mid_series[market(name)?].clone())
    }

    fn trend_series(&self, name: &str) -> PyResult<Vec<f64>> {
        Ok(self.inner.trend_series[market(name)?].clone())
    }

    /// Configuration labels such as `"+-+"`, one per step.
    fn config_timeline(&self) -> Vec<String> {
        self.inner.config_timeline.iter().map(|c| c.label()).collect()
    }

    /// `(step, kind, mu, exploited, config)` per opportunity.
    fn opportunities(&self) -> Vec<(u64, &'static str, f64, bool, String)> {
        self.inner
            .opportunities
            .iter()
            .map(|o| (o.step_index, o.kind.label(), o.mu, o.exploited, o.config_at_emergence.label()))
            .collect()
    }

    /// `(market, step, price, buyer, seller, kind)` per transaction.
    fn transactions(&self) -> Vec<(&'static str, u64, f64, u32, u32, String)> {
        self.inner
            .transactions
            .iter()
            .map(|t| {
                let kind = format!("{:?}", t.kind);
                (t.market.key(), t.step_index, t.price, t.buyer_id, t.seller_id, kind)
            })
            .collect()
    }

    /// Appearance probabilities, mean lifetimes in seconds and the
    /// transition matrix, keyed by configuration label.
    fn config_stats(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let stats = config_stats(&self.inner.config_timeline, self.inner.dt()).map_err(to_py)?;
        let dict = pyo3::types::PyDict::new(py);
        let labels: Vec<String> = fxarb::EcologyConfig::all().map(|c| c.label()).collect();
        let appearance: BTreeMap<String, f64> = labels
            .iter()
            .cloned()
            .zip(stats.appearance_probability)
            .collect();
        let lifetime: BTreeMap<String, Option<f64>> =
            labels.iter().cloned().zip(stats.mean_lifetime).collect();
        let mut transitions: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (i, from) in labels.iter().enumerate() {
            transitions.insert(
                from.clone(),
                labels.iter().cloned().zip(stats.transition_matrix[i]).collect(),
            );
        }
        let mut same = BTreeMap::new();
        for pair in CORRELATION_PAIRS {
            let p = same_state_probability(&self.inner.config_timeline, pair).map_err(to_py)?;
            same.insert(pair_name(pair), p);
        }
        dict.set_item("appearance_probability", appearance)?;
        dict.set_item("mean_lifetime", lifetime)?;
        dict.set_item("transition_matrix", transitions)?;
        dict.set_item("same_state_probability", same)?;
        Ok(dict.into_any().unbind())
    }

    /// `{pair: [(omega, rho, samples), ...]}` over the given time scales.
    #[pyo3(signature = (omega_grid=None))]
    fn correlations(
        &self,
        omega_grid: Option<Vec<f64>>,
    ) -> PyResult<BTreeMap<String, Vec<(f64, f64, usize)>>> {
        let grid = omega_grid.unwrap_or_else(|| DEFAULT_OMEGA_GRID.to_vec());
        let curves = correlation_curves(&[&self.inner.mid_series], self.inner.dt(), &grid)
            .map_err(to_py)?;
        Ok(curves
            .into_iter()
            .map(|c| {
                let points = c.points.iter().map(|p| (p.omega, p.rho, p.sample_count)).collect();
                (pair_name(c.pair), points)
            })
            .collect())
    }

    /// Writes the five export files into `directory`.
    #[pyo3(signature = (directory, omega_grid=None))]
    fn export(&self, directory: PathBuf, omega_grid: Option<Vec<f64>>) -> PyResult<()> {
        let grid = omega_grid.unwrap_or_else(|| DEFAULT_OMEGA_GRID.to_vec());
        export_artifacts(&self.inner, &directory, &grid).map_err(to_py)
    }
}

/// Runs one simulation with the interpreter lock released.
#[pyfunction]
fn run(py: Python<'_>, config: PyConfig) -> PyResult<PyArtifacts> {
    let inner = py.detach(|| fxarb::run(&config.inner)).map_err(to_py)?;
    Ok(PyArtifacts { inner })
}

/// One run per seed, in seed order.
#[pyfunction]
fn run_ensemble(py: Python<'_>, config: PyConfig, seeds: Vec<u64>) -> PyResult<Vec<PyArtifacts>> {
    let runs = py
        .detach(|| fxarb::run_ensemble(&config.inner, &seeds))
        .map_err(to_py)?;
    Ok(runs.into_iter().map(|inner| PyArtifacts { inner }).collect())
}

#[pyfunction]
fn mu_one(bid_eurusd: f64, bid_usdjpy: f64, ask_eurjpy: f64) -> PyResult<f64> {
    core_mu_one(bid_eurusd, bid_usdjpy, ask_eurjpy).map_err(to_py)
}

#[pyfunction]
fn mu_two(bid_eurjpy: f64, ask_eurusd: f64, ask_usdjpy: f64) -> PyResult<f64> {
    core_mu_two(bid_eurjpy, ask_eurusd, ask_usdjpy).map_err(to_py)
}

/// `"I"`, `"II"` or `None` for the two processes against `1 + zeta`.
#[pyfunction]
#[pyo3(signature = (mu1, mu2, zeta=0.0))]
fn detect(mu1: f64, mu2: f64, zeta: f64) -> Option<&'static str> {
    detect_opportunity(mu1, mu2, zeta).map(|k| k.label())
}

#[pyfunction]
fn sample_initial_dealing_price(u: f64, spread: f64, center: f64) -> PyResult<f64> {
    core_sample(u, spread, center).map_err(to_py)
}

/// Mid prices on the common 100 ms grid of an event-record file.
#[pyfunction]
fn ingest(path: PathBuf) -> PyResult<BTreeMap<String, Vec<f64>>> {
    let file = std::fs::File::open(&path).map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))?;
    let series = ingest_records(file).map_err(to_py)?.aligned();
    Ok(MarketId::ALL.iter().map(|&m| (m.key().to_string(), series[m].clone())).collect())
}

/// Pooled correlation curves of mid-price series given as
/// `{market: [prices]}` dictionaries.
#[pyfunction]
#[pyo3(signature = (series, dt, omega_grid=None))]
fn correlations(
    series: Vec<BTreeMap<String, Vec<f64>>>,
    dt: f64,
    omega_grid: Option<Vec<f64>>,
) -> PyResult<BTreeMap<String, Vec<(f64, f64, usize)>>> {
    let grid = omega_grid.unwrap_or_else(|| DEFAULT_OMEGA_GRID.to_vec());
    let mut converted = Vec::with_capacity(series.len());
    for s in &series {
        let mut per = PerMarket::from_fn(|_| Vec::new());
        for m in MarketId::ALL {
            per[m] = s
                .get(m.key())
                .cloned()
                .ok_or_else(|| PyValueError::new_err(format!("missing {}", m.key())))?;
        }
        converted.push(per);
    }
    let refs: Vec<&PerMarket<Vec<f64>>> = converted.iter().collect();
    let curves = compute_correlations(&refs, dt, &grid).map_err(to_py)?;
    Ok(curves
        .into_iter()
        .map(|c| {
            let points = c.points.iter().map(|p| (p.omega, p.rho, p.sample_count)).collect();
            (pair_name(c.pair), points)
        })
        .collect())
}

#[pymodule(name = "fxarb")]
fn fxarb_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyArtifacts>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(mu_one, m)?)?;
    m.add_function(wrap_pyfunction!(mu_two, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(sample_initial_dealing_price, m)?)?;
    m.add_function(wrap_pyfunction!(ingest, m)?)?;
    m.add_function(wrap_pyfunction!(correlations, m)?)?;
    Ok(())
}
