//! Synthetic record files in the ingestion format, generated from a short
//! simulation: best quotes at every 100 ms grid point where they changed,
//! plus one deal per maker-maker transaction.

use std::io::Write;

use chrono::{NaiveDate, NaiveDateTime, TimeDelta};

use super::ingest::{Direction, EventKind, EventRecord, GRID_MS, HEADER};
use crate::engine::{Simulation, SimulationConfig};
use crate::error::{Error, Result};
use crate::lob::{BestQuotes, TransactionKind};
use crate::market::{MarketId, PerMarket};

/// Start of every synthetic file.
pub fn synth_origin() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2011, 5, 10)
        .and_then(|d| d.and_hms_opt(9, 0, 0))
        .expect("valid origin")
}

/// Records of a `seconds`-long simulation with default parameters.
pub fn synth_records(seed: u64, seconds: f64) -> Result<Vec<EventRecord>> {
    let mut config = SimulationConfig::new(1, seed);
    let dt = config.calibration.dt;
    let steps = (seconds / dt).round() as u64;
    if steps == 0 {
        return Err(Error::InvalidConfig(
            "synthetic fixture needs a positive duration".into(),
        ));
    }
    config.steps = steps;
    let steps_per_cell = ((GRID_MS as f64 / 1000.0) / dt).round().max(1.0) as u64;
    let origin = synth_origin();
    let at =
        |step: u64| origin + TimeDelta::milliseconds(((step as f64 * dt) * 1000.0).round() as i64);

    let mut sim = Simulation::new(config)?;
    let mut records = Vec::new();
    let mut last: PerMarket<Option<(f64, f64)>> = PerMarket::splat(None);
    let mut seen_trades = 0;
    let quote = |records: &mut Vec<EventRecord>, ts, m, dir, price| {
        records.push(EventRecord {
            timestamp: ts,
            market: m,
            event: EventKind::Quote,
            direction: dir,
            depth: 1,
            price,
            volume: 1,
        })
    };
    for step in 0..=steps {
        if step % steps_per_cell == 0 {
            let ts = at(step);
            for m in MarketId::ALL {
                let best: BestQuotes = sim.markets()[m].best_quotes()?;
                let prev = last[m];
                if prev.is_none_or(|(b, _)| b != best.bid) {
                    quote(&mut records, ts, m, Direction::Bid, best.bid);
                }
                if prev.is_none_or(|(_, a)| a != best.ask) {
                    quote(&mut records, ts, m, Direction::Ask, best.ask);
                }
                last[m] = Some((best.bid, best.ask));
            }
        }
        if step == steps {
            break;
        }
        sim.step()?;
        let trades = &sim.artifacts().transactions;
        for t in &trades[seen_trades..] {
            if t.kind == TransactionKind::MakerMaker {
                records.push(EventRecord {
                    timestamp: at(step + 1),
                    market: t.market,
                    event: EventKind::Deal,
                    direction: if t.buyer_id < t.seller_id {
                        Direction::Buy
                    } else {
                        Direction::Sell
                    },
                    depth: 1,
                    price: t.price,
                    volume: 1,
                });
            }
        }
        seen_trades = trades.len();
    }
    Ok(records)
}

fn depth_label(depth: u32) -> String {
    let suffix = match (depth % 10, depth % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{depth}{suffix}")
}

pub fn write_records<W: Write>(out: W, records: &[EventRecord]) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(HEADER)?;
    for r in records {
        writer.write_record([
            r.timestamp.format("%Y-%m-%d").to_string(),
            r.timestamp.format("%H.%M.%S%.3f").to_string(),
            r.market.symbol().to_string(),
            r.event.to_string(),
            r.direction.to_string(),
            depth_label(r.depth),
            r.price.to_string(),
            r.volume.to_string(),
        ])?;
    }
    writer.flush()
}
