//! Experiment configuration files.
//!
//! A config is a flat TOML document with an optional `[extended]` table:
//!
//! ```toml
//! steps = 500000
//! seed = 7
//! arbitrager = true        # default true
//! variant = "arbitrager"   # or "dealer"
//! n = 15                   # trend window
//! xi = 5.0                 # exponential weight scale
//! c = 0.8                  # or c_EURUSD / c_USDJPY / c_EURJPY
//! N_EURUSD = 50
//! N_USDJPY = 35
//! N_EURJPY = 25
//! Gamma = 0.7
//! dt = 0.01
//! p0_USDJPY = 110.0        # likewise for the other markets
//! L_USDJPY = 4.4
//!
//! [extended]
//! lambda_A = 0.01
//! lambda_MM = 0.001        # or lambda_MM_EURUSD / ...
//! gamma = 0.01
//! ```
//!
//! Only `steps` and `seed` are required. Omitted keys of the `[extended]`
//! table take their [`RiskProfile::reference`] values.

use serde::Deserialize;
use toml::Spanned;

use crate::arbitrage::RiskProfile;
use crate::engine::SimulationConfig;
use crate::error::{Error, Result};
use crate::lob::ModelVariant;
use crate::market::MarketId;
use crate::trend::TrendScheme;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    steps: Option<Spanned<i64>>,
    seed: Option<Spanned<u64>>,
    arbitrager: Option<bool>,
    variant: Option<Spanned<String>>,
    trend_scheme: Option<Spanned<String>>,
    n: Option<Spanned<i64>>,
    xi: Option<Spanned<f64>>,
    c: Option<Spanned<f64>>,
    #[serde(rename = "c_EURUSD")]
    c_eurusd: Option<Spanned<f64>>,
    #[serde(rename = "c_USDJPY")]
    c_usdjpy: Option<Spanned<f64>>,
    #[serde(rename = "c_EURJPY")]
    c_eurjpy: Option<Spanned<f64>>,
    #[serde(rename = "N_EURUSD")]
    n_eurusd: Option<Spanned<i64>>,
    #[serde(rename = "N_USDJPY")]
    n_usdjpy: Option<Spanned<i64>>,
    #[serde(rename = "N_EURJPY")]
    n_eurjpy: Option<Spanned<i64>>,
    #[serde(rename = "Gamma")]
    gamma: Option<Spanned<f64>>,
    dt: Option<Spanned<f64>>,
    #[serde(rename = "p0_EURUSD")]
    p0_eurusd: Option<Spanned<f64>>,
    #[serde(rename = "p0_USDJPY")]
    p0_usdjpy: Option<Spanned<f64>>,
    #[serde(rename = "p0_EURJPY")]
    p0_eurjpy: Option<Spanned<f64>>,
    #[serde(rename = "L_EURUSD")]
    l_eurusd: Option<Spanned<f64>>,
    #[serde(rename = "L_USDJPY")]
    l_usdjpy: Option<Spanned<f64>>,
    #[serde(rename = "L_EURJPY")]
    l_eurjpy: Option<Spanned<f64>>,
    extended: Option<Spanned<RawExtended>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExtended {
    #[serde(rename = "lambda_A")]
    lambda_a: Option<Spanned<f64>>,
    #[serde(rename = "lambda_MM")]
    lambda_mm: Option<Spanned<f64>>,
    #[serde(rename = "lambda_MM_EURUSD")]
    lambda_mm_eurusd: Option<Spanned<f64>>,
    #[serde(rename = "lambda_MM_USDJPY")]
    lambda_mm_usdjpy: Option<Spanned<f64>>,
    #[serde(rename = "lambda_MM_EURJPY")]
    lambda_mm_eurjpy: Option<Spanned<f64>>,
    gamma: Option<Spanned<f64>>,
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::ConfigParse {
            line: line_of(self.text, offset),
            message: message.into(),
        })
    }

    fn positive(&self, value: &Option<Spanned<f64>>, key: &str, target: &mut f64) -> Result<()> {
        if let Some(v) = value {
            let x = *v.get_ref();
            if !(x > 0.0) || !x.is_finite() {
                return self.err(v.span().start, format!("{key} must be positive (got {x})"));
            }
            *target = x;
        }
        Ok(())
    }

    fn non_negative(
        &self,
        value: &Option<Spanned<f64>>,
        key: &str,
        target: &mut f64,
    ) -> Result<()> {
        if let Some(v) = value {
            let x = *v.get_ref();
            if !(x >= 0.0) || !x.is_finite() {
                return self.err(v.span().start, format!("{key} must be >= 0 (got {x})"));
            }
            *target = x;
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<SimulationConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::ConfigParse {
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    let ctx = Ctx { text };
    let end = text.len();

    let Some(steps) = &raw.steps else {
        return ctx.err(end, "missing required key `steps`");
    };
    if *steps.get_ref() < 1 {
        return ctx.err(
            steps.span().start,
            format!("steps must be ≥ 1 (got {})", steps.get_ref()),
        );
    }
    let Some(seed) = &raw.seed else {
        return ctx.err(end, "missing required key `seed`");
    };

    let mut config = SimulationConfig::new(*steps.get_ref() as u64, *seed.get_ref());
    if let Some(v) = &raw.variant {
        config.variant = match v.get_ref().to_ascii_lowercase().as_str() {
            "arbitrager" | "arbitrager_model" => ModelVariant::ArbitragerModel,
            "dealer" | "dealer_model" => ModelVariant::DealerModel,
            other => return ctx.err(v.span().start, format!("unknown variant `{other}`")),
        };
        if config.variant == ModelVariant::DealerModel {
            config.trend.scheme = TrendScheme::Linear;
        }
    }
    if let Some(v) = &raw.trend_scheme {
        config.trend.scheme = match v.get_ref().to_ascii_lowercase().as_str() {
            "exponential" => TrendScheme::Exponential,
            "linear" => TrendScheme::Linear,
            other => return ctx.err(v.span().start, format!("unknown trend_scheme `{other}`")),
        };
    }
    if let Some(a) = raw.arbitrager {
        config.arbitrager_enabled = a;
    }
    if let Some(n) = &raw.n {
        if *n.get_ref() < 1 {
            return ctx.err(
                n.span().start,
                format!("n must be ≥ 1 (got {})", n.get_ref()),
            );
        }
        config.trend.window = *n.get_ref() as usize;
    }
    ctx.positive(&raw.xi, "xi", &mut config.trend.scale)?;

    let cal = &mut config.calibration;
    if let Some(c) = &raw.c {
        if !c.get_ref().is_finite() {
            return ctx.err(c.span().start, "c must be finite");
        }
        for m in MarketId::ALL {
            cal.trend_strength[m] = *c.get_ref();
        }
    }
    let per_market = |m: MarketId| -> [&Option<Spanned<f64>>; 3] {
        match m {
            MarketId::EurUsd => [&raw.c_eurusd, &raw.p0_eurusd, &raw.l_eurusd],
            MarketId::UsdJpy => [&raw.c_usdjpy, &raw.p0_usdjpy, &raw.l_usdjpy],
            MarketId::EurJpy => [&raw.c_eurjpy, &raw.p0_eurjpy, &raw.l_eurjpy],
        }
    };
    for m in MarketId::ALL {
        let [c, p0, l] = per_market(m);
        if let Some(c) = c {
            if !c.get_ref().is_finite() {
                return ctx.err(c.span().start, format!("c_{} must be finite", m.key()));
            }
            cal.trend_strength[m] = *c.get_ref();
        }
        ctx.positive(p0, &format!("p0_{}", m.key()), &mut cal.initial_price[m])?;
        ctx.positive(l, &format!("L_{}", m.key()), &mut cal.spread[m])?;
        let makers = match m {
            MarketId::EurUsd => &raw.n_eurusd,
            MarketId::UsdJpy => &raw.n_usdjpy,
            MarketId::EurJpy => &raw.n_eurjpy,
        };
        if let Some(n) = makers {
            if *n.get_ref() < 2 {
                return ctx.err(
                    n.span().start,
                    format!("N must be ≥ 2 (got {} for N_{})", n.get_ref(), m.key()),
                );
            }
            cal.makers[m] = *n.get_ref() as usize;
        }
    }
    ctx.positive(&raw.gamma, "Gamma", &mut cal.gamma)?;
    ctx.positive(&raw.dt, "dt", &mut cal.dt)?;

    if let Some(ext) = &raw.extended {
        let e = ext.get_ref();
        let mut risk = RiskProfile::reference();
        ctx.non_negative(&e.lambda_a, "lambda_A", &mut risk.lambda_arbitrager)?;
        if let Some(v) = &e.lambda_mm {
            let mut x = 0.0;
            ctx.non_negative(&Some(v.clone()), "lambda_MM", &mut x)?;
            for m in MarketId::ALL {
                risk.lambda_makers[m] = x;
            }
        }
        for (m, v) in [
            (MarketId::EurUsd, &e.lambda_mm_eurusd),
            (MarketId::UsdJpy, &e.lambda_mm_usdjpy),
            (MarketId::EurJpy, &e.lambda_mm_eurjpy),
        ] {
            ctx.non_negative(
                v,
                &format!("lambda_MM_{}", m.key()),
                &mut risk.lambda_makers[m],
            )?;
        }
        if let Some(g) = &e.gamma {
            let x = *g.get_ref();
            if !(0.0..=1.0).contains(&x) {
                return ctx.err(
                    g.span().start,
                    format!("gamma must lie in [0, 1] (got {x})"),
                );
            }
            risk.peg_probability = x;
        }
        config.extended = Some(risk);
    }

    config.validate().map_err(|e| Error::ConfigParse {
        line: 1,
        message: e.to_string(),
    })?;
    Ok(config)
}

pub fn read_config(path: &std::path::Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::default_parameters;
    use crate::market::PerMarket;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse_config("steps = 1000\nseed = 7\n").unwrap();
        assert_eq!(c.steps, 1000);
        assert_eq!(c.seed, 7);
        assert_eq!(c.trend.window, 15);
        assert_eq!(c.trend.scale, 5.0);
        assert_eq!(c.trend.scheme, TrendScheme::Exponential);
        assert_eq!(c.calibration, default_parameters());
        assert_eq!(c.calibration.trend_strength, PerMarket::splat(0.8));
        assert_eq!(c.calibration.gamma, 0.7);
        assert_eq!(c.calibration.dt, 0.01);
        assert!(c.arbitrager_enabled);
        assert_eq!(c.extended, None);
        assert_eq!(c.variant, ModelVariant::ArbitragerModel);
    }

    #[test]
    fn too_few_makers_reports_line() {
        let err = parse_config("steps = 10\nseed = 1\nN_EURUSD = 1\n").unwrap_err();
        match err {
            Error::ConfigParse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("N must be ≥ 2"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = parse_config("steps = 10\n\nseed = 1\nbogus = 3\n").unwrap_err();
        match err {
            Error::ConfigParse { line, message } => {
                assert_eq!(line, 4);
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_required_keys() {
        for text in ["seed = 1", "steps = 5"] {
            let msg = parse_config(text).unwrap_err().to_string();
            assert!(msg.contains("missing required key"), "{msg}");
        }
        assert!(parse_config("steps = 0\nseed = 1").is_err());
    }

    #[test]
    fn extended_block() {
        let text =
            "steps = 10\nseed = 1\n[extended]\nlambda_A = 0.01\nlambda_MM = 0.001\ngamma = 0.01\n";
        let c = parse_config(text).unwrap();
        let r = c.extended.unwrap();
        assert_eq!(r.lambda_arbitrager, 0.01);
        assert_eq!(r.lambda_makers, PerMarket::splat(0.001));
        assert_eq!(r.peg_probability, 0.01);
    }

    #[test]
    fn per_market_overrides() {
        let text = "steps = 10\nseed = 1\nc = 0.5\nc_EURJPY = 0.9\nN_USDJPY = 45\nvariant = \"dealer\"\nL_EURUSD = 0.1\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.calibration.trend_strength, PerMarket([0.5, 0.5, 0.9]));
        assert_eq!(c.calibration.makers[MarketId::UsdJpy], 45);
        assert_eq!(c.calibration.spread[MarketId::EurUsd], 0.1);
        assert_eq!(c.variant, ModelVariant::DealerModel);
        assert_eq!(c.trend.scheme, TrendScheme::Linear);
    }

    #[test]
    fn extended_gamma_range() {
        let err = parse_config("steps = 1\nseed = 1\n[extended]\ngamma = 1.5\n").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 4, .. }), "{err}");
    }
}
