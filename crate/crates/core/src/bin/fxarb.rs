use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use fxarb::analytics::{ecology_timeline, trends_from_prices, DEFAULT_OMEGA_GRID};
use fxarb::io::config::read_config;
use fxarb::io::export::{
    compute_correlations, export_artifacts, read_manifest, read_mid_series, write_config_stats,
    write_correlations, write_mid_series, CONFIG_STATS_FILE, CORRELATIONS_FILE, MANIFEST_FILE,
    MID_SERIES_FILE,
};
use fxarb::io::ingest::ingest_records;
use fxarb::io::synth::{synth_records, write_records};
use fxarb::{
    run, run_ensemble, Error, ModelVariant, PerMarket, Result, RiskProfile, SimulationConfig,
    TrendConfig, TrendScheme,
};

#[derive(Parser)]
#[command(
    name = "fxarb",
    version,
    about = "Triangular-arbitrage FX market simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and export its artifacts.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated time scales in seconds.
        #[arg(long, value_delimiter = ',')]
        omega_grid: Vec<f64>,
    },
    /// Correlations and configuration statistics of mid-price series.
    Analyze {
        /// Artifact directories or mid_series.csv files; several are pooled.
        #[arg(long = "input", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated time scales in seconds.
        #[arg(long, value_delimiter = ',')]
        omega_grid: Vec<f64>,
    },
    /// Convert an event-record file into a 100 ms mid_series.csv.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one simulation per seed, each into its own directory.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated time scales in seconds.
        #[arg(long, value_delimiter = ',')]
        omega_grid: Vec<f64>,
    },
    /// Write a synthetic event-record file from a short simulation.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 60.0)]
        seconds: f64,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Step count, required without --config.
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    no_arbitrager: bool,
    /// Enable defensive resets and pegging (reference values unless the
    /// config has an extended block).
    #[arg(long)]
    extended: bool,
    #[arg(long, value_enum)]
    variant: Option<Variant>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Arbitrager,
    Dealer,
}

/// Checks a user grid; an empty one selects the default.
fn resolve_grid(grid: Vec<f64>) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Ok(DEFAULT_OMEGA_GRID.to_vec());
    }
    if grid.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidConfig("time scales must be positive".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "time scales must be strictly increasing".into(),
        ));
    }
    Ok(grid)
}

impl ModelArgs {
    fn resolve(&self, seed: Option<u64>) -> Result<SimulationConfig> {
        let mut config = match (&self.config, self.steps) {
            (Some(path), _) => read_config(path)?,
            (None, Some(steps)) => SimulationConfig::new(steps, seed.unwrap_or(0)),
            (None, None) => {
                return Err(Error::InvalidConfig(
                    "either --config or --steps is required".into(),
                ))
            }
        };
        if let Some(steps) = self.steps {
            config.steps = steps;
        }
        if let Some(seed) = seed {
            config.seed = seed;
        }
        if self.no_arbitrager {
            config.arbitrager_enabled = false;
        }
        if self.extended && config.extended.is_none() {
            config.extended = Some(RiskProfile::reference());
        }
        match self.variant {
            Some(Variant::Dealer) => {
                config.variant = ModelVariant::DealerModel;
                config.trend.scheme = TrendScheme::Linear;
            }
            Some(Variant::Arbitrager) => config.variant = ModelVariant::ArbitragerModel,
            None => {}
        }
        config.validate()?;
        Ok(config)
    }
}

fn simulate(config: &SimulationConfig, out: &Path, grid: &[f64]) -> Result<()> {
    info!(
        "simulating {} steps with seed {}",
        config.steps, config.seed
    );
    let artifacts = run(config)?;
    export_artifacts(&artifacts, out, grid)?;
    info!(
        "{} transactions, {} opportunities written to {}",
        artifacts.transactions.len(),
        artifacts.opportunities.len(),
        out.display()
    );
    Ok(())
}

fn sweep(config: &SimulationConfig, seeds: &[u64], out: &Path, grid: &[f64]) -> Result<()> {
    let runs = run_ensemble(config, seeds)?;
    for artifacts in &runs {
        let dir = out.join(format!("seed_{}", artifacts.seed()));
        export_artifacts(artifacts, &dir, grid)?;
    }
    let series: Vec<&PerMarket<Vec<f64>>> = runs.iter().map(|r| &r.mid_series).collect();
    let curves = compute_correlations(&series, config.calibration.dt, grid)?;
    write_correlations(&out.join(CORRELATIONS_FILE), &curves)?;
    info!("{} runs written to {}", runs.len(), out.display());
    Ok(())
}

/// Loads a mid series, with the trend settings of its run when the
/// directory carries a manifest.
fn load_input(path: &Path) -> Result<(PerMarket<Vec<f64>>, f64, TrendConfig)> {
    let (csv, manifest) = if path.is_dir() {
        let manifest = path.join(MANIFEST_FILE);
        (
            path.join(MID_SERIES_FILE),
            manifest.exists().then_some(manifest),
        )
    } else {
        (path.to_path_buf(), None)
    };
    let table = read_mid_series(&csv)?;
    let (trend, manifest_dt) = match manifest {
        Some(m) => {
            let config = read_manifest(&m)?.config;
            (config.trend, Some(config.calibration.dt))
        }
        None => (TrendConfig::default(), None),
    };
    let dt = manifest_dt.or(table.dt).ok_or_else(|| Error::Format {
        path: csv.clone(),
        message: "need at least two steps to infer the time step".into(),
    })?;
    Ok((table.series, dt, trend))
}

fn analyze(inputs: &[PathBuf], out: &Path, grid: &[f64]) -> Result<()> {
    let loaded = inputs
        .iter()
        .map(|p| load_input(p))
        .collect::<Result<Vec<_>>>()?;
    let dt = loaded[0].1;
    if loaded.iter().any(|l| (l.1 - dt).abs() > 1e-12 * dt) {
        return Err(Error::InvalidConfig(
            "pooled inputs must share one time step".into(),
        ));
    }
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    let series: Vec<&PerMarket<Vec<f64>>> = loaded.iter().map(|l| &l.0).collect();
    let curves = compute_correlations(&series, dt, grid)?;
    write_correlations(&out.join(CORRELATIONS_FILE), &curves)?;
    // configuration statistics are per series; the first input is reported
    if loaded.len() > 1 {
        warn!("configuration statistics use the first input only");
    }
    let (prices, _, trend) = &loaded[0];
    let timeline = ecology_timeline(&trends_from_prices(prices, trend));
    write_config_stats(&out.join(CONFIG_STATS_FILE), &timeline, dt)?;
    info!(
        "analysis of {} input(s) written to {}",
        inputs.len(),
        out.display()
    );
    Ok(())
}

fn ingest(input: &Path, out: &Path) -> Result<()> {
    let file = File::open(input).map_err(|e| Error::Io {
        path: input.to_path_buf(),
        source: e,
    })?;
    let ingested = ingest_records(file)?;
    let (series, dt) = (ingested.aligned(), ingested.dt());
    if out.extension().is_some() && !out.is_dir() {
        write_mid_series(out, &series, dt)
    } else {
        std::fs::create_dir_all(out).map_err(|e| Error::Io {
            path: out.to_path_buf(),
            source: e,
        })?;
        write_mid_series(&out.join(MID_SERIES_FILE), &series, dt)
    }
}

fn synth(out: &Path, seed: u64, seconds: f64) -> Result<()> {
    let records = synth_records(seed, seconds)?;
    let io_err = |e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    };
    let file = File::create(out).map_err(io_err)?;
    write_records(BufWriter::new(file), &records).map_err(io_err)?;
    info!("{} records written to {}", records.len(), out.display());
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            model,
            seed,
            out,
            omega_grid,
        } => simulate(&model.resolve(seed)?, &out, &resolve_grid(omega_grid)?),
        Command::Analyze {
            inputs,
            out,
            omega_grid,
        } => analyze(&inputs, &out, &resolve_grid(omega_grid)?),
        Command::Ingest { input, out } => ingest(&input, &out),
        Command::Sweep {
            model,
            seeds,
            out,
            omega_grid,
        } => sweep(
            &model.resolve(None)?,
            &seeds,
            &out,
            &resolve_grid(omega_grid)?,
        ),
        Command::Synth { out, seed, seconds } => synth(&out, seed, seconds),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
