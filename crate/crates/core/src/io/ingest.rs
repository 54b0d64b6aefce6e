//! Ingestion of limit-order-book event records into mid-price series on a
//! 100 ms grid.
//!
//! Input columns: `Date, Timestamp, Market, Event, Direction, Depth, Price,
//! Volume`, e.g. `2011-05-10,09.00.00.000,USD/JPY,Deal,Buy,1st,100.000,1`.
//! Depth-1 quotes move the best bid or ask; deals are only checked for
//! chronology and counted.

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use log::info;

use crate::error::{Error, Result};
use crate::market::{MarketId, PerMarket};

pub const HEADER: [&str; 8] = [
    "Date",
    "Timestamp",
    "Market",
    "Event",
    "Direction",
    "Depth",
    "Price",
    "Volume",
];

/// Width of a grid cell in milliseconds.
pub const GRID_MS: i64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Quote,
    Deal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Buy,
    Sell,
    Bid,
    Ask,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Quote => "Quote",
            EventKind::Deal => "Deal",
        })
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Buy => "Buy",
            Direction::Sell => "Sell",
            Direction::Bid => "Bid",
            Direction::Ask => "Ask",
        })
    }
}

impl FromStr for EventKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "quote" => Ok(EventKind::Quote),
            "deal" => Ok(EventKind::Deal),
            _ => Err(format!("unknown event `{s}`")),
        }
    }
}

impl FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "buy" => Ok(Direction::Buy),
            "sell" => Ok(Direction::Sell),
            "bid" => Ok(Direction::Bid),
            "ask" => Ok(Direction::Ask),
            _ => Err(format!("unknown direction `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub timestamp: NaiveDateTime,
    pub market: MarketId,
    pub event: EventKind,
    pub direction: Direction,
    pub depth: u32,
    pub price: f64,
    pub volume: u64,
}

impl EventRecord {
    /// Index of the nearest 100 ms grid point, counted from the epoch.
    pub fn grid_index(&self) -> i64 {
        let ms = self.timestamp.and_utc().timestamp_millis();
        (ms + GRID_MS / 2).div_euclid(GRID_MS)
    }
}

/// Depth as `1st`, `2nd`, `3rd`, `4th`, ... or a bare integer.
pub fn parse_depth(s: &str) -> std::result::Result<u32, String> {
    let digits = s.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    let depth: u32 = digits.parse().map_err(|_| format!("invalid depth `{s}`"))?;
    if depth == 0 {
        return Err(format!("depth must be positive, got `{s}`"));
    }
    Ok(depth)
}

/// `HH.MM.SS.mmm` (dots or colons).
pub fn parse_timestamp(s: &str) -> std::result::Result<NaiveTime, String> {
    let normalized: String = s.chars().map(|c| if c == ':' { '.' } else { c }).collect();
    NaiveTime::parse_from_str(&normalized, "%H.%M.%S%.3f")
        .map_err(|e| format!("invalid timestamp `{s}`: {e}"))
}

fn parse_row(row: &csv::StringRecord) -> std::result::Result<EventRecord, String> {
    if row.len() != HEADER.len() {
        return Err(format!(
            "expected {} fields, found {}",
            HEADER.len(),
            row.len()
        ));
    }
    let date = NaiveDate::parse_from_str(&row[0], "%Y-%m-%d")
        .map_err(|e| format!("invalid date `{}`: {e}", &row[0]))?;
    let time = parse_timestamp(&row[1])?;
    let market: MarketId = row[2].parse()?;
    let event: EventKind = row[3].parse()?;
    let direction: Direction = row[4].parse()?;
    match (event, direction) {
        (EventKind::Quote, Direction::Bid | Direction::Ask) => {}
        (EventKind::Deal, Direction::Buy | Direction::Sell) => {}
        _ => return Err(format!("direction {direction} does not apply to a {event}")),
    }
    let depth = parse_depth(&row[5])?;
    let price: f64 = row[6]
        .parse()
        .map_err(|_| format!("invalid price `{}`", &row[6]))?;
    if !(price > 0.0) || !price.is_finite() {
        return Err(format!("price must be positive, got `{}`", &row[6]));
    }
    let volume: u64 = row[7]
        .parse()
        .map_err(|_| format!("invalid volume `{}`", &row[7]))?;
    if volume == 0 {
        return Err("volume must be positive".into());
    }
    Ok(EventRecord {
        timestamp: date.and_time(time),
        market,
        event,
        direction,
        depth,
        price,
        volume,
    })
}

/// Parses and validates records. Row numbers in errors are file lines.
pub fn parse_records<R: Read>(input: R) -> Result<Vec<EventRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let mut records: Vec<EventRecord> = Vec::new();
    let mut header_seen = false;
    for row in reader.records() {
        let row = row.map_err(|e| Error::Ingest {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.iter().all(str::is_empty) {
            continue;
        }
        if !header_seen {
            let names: Vec<&str> = row.iter().collect();
            if names != HEADER {
                return Err(Error::Ingest {
                    row: line,
                    message: format!(
                        "expected header {}, found {}",
                        HEADER.join(","),
                        names.join(",")
                    ),
                });
            }
            header_seen = true;
            continue;
        }
        let record = parse_row(&row).map_err(|message| Error::Ingest { row: line, message })?;
        if let Some(prev) = records.last() {
            if record.timestamp < prev.timestamp {
                return Err(Error::Ingest {
                    row: line,
                    message: format!(
                        "timestamp {} precedes the previous record ({})",
                        record.timestamp, prev.timestamp
                    ),
                });
            }
        }
        records.push(record);
    }
    Ok(records)
}

/// One market's mid prices on consecutive grid points from `start`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridSeries {
    /// Grid index of `values[0]`.
    pub start: i64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IngestedSeries {
    pub markets: PerMarket<GridSeries>,
    pub deal_count: usize,
    pub quote_count: usize,
}

impl IngestedSeries {
    pub fn is_empty(&self) -> bool {
        self.markets.0.iter().all(|s| s.values.is_empty())
    }

    /// Grid step in seconds.
    pub fn dt(&self) -> f64 {
        GRID_MS as f64 / 1000.0
    }

    /// The three series restricted to the grid points where every market
    /// has a mid price.
    pub fn aligned(&self) -> PerMarket<Vec<f64>> {
        let start = self.markets.0.iter().map(|s| s.start).max().unwrap_or(0);
        let end = self
            .markets
            .0
            .iter()
            .map(|s| s.start + s.values.len() as i64)
            .min()
            .unwrap_or(0);
        PerMarket::from_fn(|m| {
            let s = &self.markets[m];
            if end <= start {
                return Vec::new();
            }
            let from = (start - s.start) as usize;
            let to = (end - s.start) as usize;
            s.values[from..to].to_vec()
        })
    }
}

/// Builds forward-filled mid series. Every market's series runs to the last
/// grid point of the input and starts at its first two-sided quote.
pub fn grid_mid_series(records: &[EventRecord]) -> IngestedSeries {
    let mut out = IngestedSeries::default();
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return out;
    };
    let last_index = last.grid_index().max(first.grid_index());
    let mut bid: PerMarket<Option<f64>> = PerMarket::splat(None);
    let mut ask: PerMarket<Option<f64>> = PerMarket::splat(None);
    let mut i = 0;
    let mut g = first.grid_index();
    while g <= last_index {
        while i < records.len() && records[i].grid_index() <= g {
            let r = &records[i];
            match r.event {
                EventKind::Deal => out.deal_count += 1,
                EventKind::Quote => {
                    out.quote_count += 1;
                    if r.depth == 1 {
                        match r.direction {
                            Direction::Bid => bid[r.market] = Some(r.price),
                            Direction::Ask => ask[r.market] = Some(r.price),
                            _ => {}
                        }
                    }
                }
            }
            i += 1;
        }
        for m in MarketId::ALL {
            if let (Some(b), Some(a)) = (bid[m], ask[m]) {
                let series = &mut out.markets[m];
                if series.values.is_empty() {
                    series.start = g;
                }
                series.values.push(0.5 * (a + b));
            }
        }
        g += 1;
    }
    out
}

pub fn ingest_records<R: Read>(input: R) -> Result<IngestedSeries> {
    let records = parse_records(input)?;
    let series = grid_mid_series(&records);
    info!(
        "ingested {} records: {} quotes, {} deals (deals do not move mid prices)",
        records.len(),
        series.quote_count,
        series.deal_count
    );
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "Date,Timestamp,Market,Event,Direction,Depth,Price,Volume\n";

    #[test]
    fn table_sample_rows_parse() {
        let text = format!(
            "{HEAD}2011-05-10,09.00.00.000,USD/JPY,Deal,Buy,1st,100.000,1\n\
             2011-10-21,21.00.00.000,EUR/USD,Quote,Ask,3rd,0.8000,5\n"
        );
        let recs = parse_records(text.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].event, EventKind::Deal);
        assert_eq!(recs[1].depth, 3);
        assert_eq!(recs[1].market, MarketId::EurUsd);
    }

    #[test]
    fn single_quote_pair_forward_fills() {
        let text = format!(
            "{HEAD}2011-05-10,09.00.00.000,USD/JPY,Quote,Bid,1st,100.000,1\n\
             2011-05-10,09.00.00.000,USD/JPY,Quote,Ask,1st,100.010,1\n\
             2011-05-10,09.00.01.000,USD/JPY,Deal,Sell,1st,100.000,1\n"
        );
        let s = ingest_records(text.as_bytes()).unwrap();
        let uj = &s.markets[MarketId::UsdJpy];
        assert_eq!(uj.values.len(), 11);
        assert!(uj.values.iter().all(|&m| (m - 100.005).abs() < 1e-12));
        assert_eq!(s.deal_count, 1);
        assert!(s.markets[MarketId::EurUsd].values.is_empty());
    }

    #[test]
    fn points_before_first_quote_are_omitted() {
        let text = format!(
            "{HEAD}2011-05-10,09.00.00.000,EUR/USD,Quote,Bid,1st,1.2500,1\n\
             2011-05-10,09.00.00.000,EUR/USD,Quote,Ask,1st,1.2502,1\n\
             2011-05-10,09.00.00.300,USD/JPY,Quote,Bid,1st,110.00,1\n\
             2011-05-10,09.00.00.300,USD/JPY,Quote,Ask,1st,110.02,1\n\
             2011-05-10,09.00.00.500,USD/JPY,Quote,Ask,2nd,110.05,1\n"
        );
        let s = ingest_records(text.as_bytes()).unwrap();
        assert_eq!(s.markets[MarketId::EurUsd].values.len(), 6);
        assert_eq!(s.markets[MarketId::UsdJpy].values.len(), 3);
        assert_eq!(
            s.markets[MarketId::UsdJpy].start - s.markets[MarketId::EurUsd].start,
            3
        );
    }

    #[test]
    fn timestamps_round_to_nearest_cell() {
        let text = format!(
            "{HEAD}2011-05-10,09.00.00.000,EUR/USD,Quote,Bid,1st,1.0,1\n\
             2011-05-10,09.00.00.000,EUR/USD,Quote,Ask,1st,1.2,1\n\
             2011-05-10,09.00.00.149,EUR/USD,Quote,Ask,1st,1.4,1\n\
             2011-05-10,09.00.00.151,EUR/USD,Quote,Bid,1st,1.2,1\n"
        );
        let s = ingest_records(text.as_bytes()).unwrap();
        let v = &s.markets[MarketId::EurUsd].values;
        assert_eq!(v.len(), 3);
        assert!((v[0] - 1.1).abs() < 1e-12);
        assert!((v[1] - 1.2).abs() < 1e-12);
        assert!((v[2] - 1.3).abs() < 1e-12);
    }

    #[test]
    fn empty_input() {
        assert!(ingest_records("".as_bytes()).unwrap().is_empty());
        assert!(ingest_records(HEAD.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = format!(
            "{HEAD}2011-05-10,09.00.00.000,USD/JPY,Deal,Buy,1st,100.000,1\n\
             2011-05-10,09.00.00.100,USD/JPY,Deal,Buy,1st,abc,1\n"
        );
        match parse_records(text.as_bytes()).unwrap_err() {
            Error::Ingest { row, message } => {
                assert_eq!(row, 3);
                assert!(message.contains("price"));
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn out_of_order_is_rejected() {
        let text = format!(
            "{HEAD}2011-05-10,09.00.01.000,USD/JPY,Deal,Buy,1st,100.000,1\n\
             2011-05-10,09.00.00.000,USD/JPY,Deal,Buy,1st,100.000,1\n"
        );
        assert!(matches!(
            parse_records(text.as_bytes()),
            Err(Error::Ingest { row: 3, .. })
        ));
    }

    #[test]
    fn bad_header_and_direction() {
        assert!(parse_records("a,b,c\n".as_bytes()).is_err());
        let text = format!("{HEAD}2011-05-10,09.00.00.000,USD/JPY,Quote,Buy,1st,100.000,1\n");
        assert!(parse_records(text.as_bytes()).is_err());
    }

    #[test]
    fn depth_spellings() {
        assert_eq!(parse_depth("1st").unwrap(), 1);
        assert_eq!(parse_depth("2nd").unwrap(), 2);
        assert_eq!(parse_depth("10th").unwrap(), 10);
        assert_eq!(parse_depth("4").unwrap(), 4);
        assert!(parse_depth("0").is_err());
        assert!(parse_depth("first").is_err());
    }
}
