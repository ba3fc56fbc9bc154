//! Company-quarter snapshots and the delimited-text snapshot schema.
//!
//! A snapshot is one company observed at one quarter end: up to 28
//! indicator values, the quarter-end price, and optionally the price one
//! year later. Snapshot files are header-driven delimited text; rows that
//! violate an invariant are skipped with a diagnostic rather than aborting
//! the parse, while a malformed header is fatal.

use std::fmt;
use std::io::{Read, Write};

use thiserror::Error;

use crate::features::{FeatureId, FeatureSet, FeatureVector};
use crate::indicators::registry;

/// A calendar quarter, ordered chronologically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quarter {
    year: i32,
    q: u8,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("quarter must be 1..=4, got {0}")]
pub struct QuarterError(pub i64);

impl Quarter {
    pub fn new(year: i32, q: u8) -> Result<Quarter, QuarterError> {
        if (1..=4).contains(&q) {
            Ok(Quarter { year, q })
        } else {
            Err(QuarterError(q as i64))
        }
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn q(self) -> u8 {
        self.q
    }

    /// The quarter `n` quarters after this one.
    pub fn plus_quarters(self, n: u32) -> Quarter {
        let index = self.year as i64 * 4 + (self.q as i64 - 1) + n as i64;
        Quarter {
            year: index.div_euclid(4) as i32,
            q: (index.rem_euclid(4) + 1) as u8,
        }
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.q)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SnapshotInvariantError {
    #[error("history_price must be a positive finite number, got {0}")]
    HistoryPrice(f64),
    #[error("future_price must be a positive finite number when present, got {0}")]
    FuturePrice(f64),
}

/// One company-quarter observation.
///
/// Indicator values are stored densely in registry order; `None` means the
/// value was not present or not available. Stored values are always finite
/// and never equal to the missing-value sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct StockSnapshot {
    pub ticker: String,
    pub quarter: Quarter,
    indicators: Vec<Option<f64>>,
    history_price: f64,
    future_price: Option<f64>,
}

impl StockSnapshot {
    pub fn new(
        ticker: impl Into<String>,
        quarter: Quarter,
        history_price: f64,
        future_price: Option<f64>,
    ) -> Result<StockSnapshot, SnapshotInvariantError> {
        if !(history_price.is_finite() && history_price > 0.0) {
            return Err(SnapshotInvariantError::HistoryPrice(history_price));
        }
        if let Some(fp) = future_price {
            if !(fp.is_finite() && fp > 0.0) {
                return Err(SnapshotInvariantError::FuturePrice(fp));
            }
        }
        Ok(StockSnapshot {
            ticker: ticker.into(),
            quarter,
            indicators: vec![None; registry().len()],
            history_price,
            future_price,
        })
    }

    pub fn history_price(&self) -> f64 {
        self.history_price
    }

    pub fn future_price(&self) -> Option<f64> {
        self.future_price
    }

    /// Stores an indicator value by registry index. Non-finite values and
    /// the sentinel literal are reclassified as missing.
    pub fn set_indicator(&mut self, index: usize, value: Option<f64>) {
        let encoded = FeatureVector::encode(value);
        self.indicators[index] = (encoded != crate::features::SENTINEL).then_some(encoded);
    }

    pub fn indicator(&self, index: usize) -> Option<f64> {
        self.indicators[index]
    }

    pub fn indicator_by_id(&self, id: &str) -> Option<f64> {
        registry().index_of(id).and_then(|i| self.indicators[i])
    }

    /// Projects this snapshot onto a feature set, encoding absent values
    /// with the sentinel. The `history_price` pseudo-feature reads the
    /// snapshot's own price.
    pub fn to_feature_vector(&self, features: &FeatureSet) -> FeatureVector {
        FeatureVector::from_options(features.members().iter().map(|id| match id {
            FeatureId::Indicator(i) => self.indicators[*i],
            FeatureId::HistoryPrice => Some(self.history_price),
        }))
    }
}

/// Options for reading and writing snapshot files.
#[derive(Debug, Clone)]
pub struct SchemaConfig {
    /// Field delimiter; comma by default.
    pub delimiter: u8,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        SchemaConfig { delimiter: b',' }
    }
}

/// A skipped input row: physical line number plus the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: u64,
    pub reason: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum SnapshotParseError {
    #[error("missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("input has no header row")]
    EmptyInput,
    #[error("failed to read input: {0}")]
    Csv(#[from] csv::Error),
}

const COL_TICKER: &str = "ticker";
const COL_YEAR: &str = "year";
const COL_QUARTER: &str = "quarter";
const COL_HISTORY_PRICE: &str = "history_price";
const COL_FUTURE_PRICE: &str = "future_price";

/// How each header column maps into a snapshot.
enum Column {
    Ticker,
    Year,
    Qtr,
    HistoryPrice,
    FuturePrice,
    Indicator(usize),
}

fn resolve_header(header: &csv::StringRecord) -> Result<Vec<Column>, SnapshotParseError> {
    let mut columns = Vec::with_capacity(header.len());
    let mut seen = vec![false; registry().len()];
    let mut seen_fixed = [false; 5];
    for name in header.iter() {
        let column = match name {
            COL_TICKER => Column::Ticker,
            COL_YEAR => Column::Year,
            COL_QUARTER => Column::Qtr,
            COL_HISTORY_PRICE => Column::HistoryPrice,
            COL_FUTURE_PRICE => Column::FuturePrice,
            other => match registry().index_of(other) {
                Some(i) => Column::Indicator(i),
                None => return Err(SnapshotParseError::UnknownColumn(other.to_string())),
            },
        };
        let dup = match &column {
            Column::Ticker => std::mem::replace(&mut seen_fixed[0], true),
            Column::Year => std::mem::replace(&mut seen_fixed[1], true),
            Column::Qtr => std::mem::replace(&mut seen_fixed[2], true),
            Column::HistoryPrice => std::mem::replace(&mut seen_fixed[3], true),
            Column::FuturePrice => std::mem::replace(&mut seen_fixed[4], true),
            Column::Indicator(i) => std::mem::replace(&mut seen[*i], true),
        };
        if dup {
            return Err(SnapshotParseError::DuplicateColumn(name.to_string()));
        }
        columns.push(column);
    }
    for (required, present) in [
        (COL_TICKER, seen_fixed[0]),
        (COL_YEAR, seen_fixed[1]),
        (COL_QUARTER, seen_fixed[2]),
        (COL_HISTORY_PRICE, seen_fixed[3]),
    ] {
        if !present {
            return Err(SnapshotParseError::MissingColumn(required));
        }
    }
    Ok(columns)
}

/// Parses one numeric cell. Empty cells, non-finite tokens, and the
/// sentinel literal are all "missing"; anything else non-numeric is a
/// hard cell error carrying the offending text.
fn parse_cell(text: &str) -> Result<Option<f64>, String> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Ok(None);
    }
    match trimmed.parse::<f64>() {
        Ok(v) => Ok(Some(FeatureVector::encode(Some(v))).filter(|e| *e != crate::features::SENTINEL)),
        Err(_) => Err(format!("unparseable number `{trimmed}`")),
    }
}

/// Reads a snapshot file. Invalid rows become diagnostics; a malformed
/// header or unreadable stream is fatal.
pub fn parse_snapshots(
    input: impl Read,
    config: &SchemaConfig,
) -> Result<(Vec<StockSnapshot>, Vec<ParseDiagnostic>), SnapshotParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(config.delimiter)
        .flexible(true)
        .has_headers(true)
        .from_reader(input);
    let header = reader.headers()?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(SnapshotParseError::EmptyInput);
    }
    let columns = resolve_header(&header)?;

    let mut snapshots = Vec::new();
    let mut diagnostics = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        match parse_row(&record, &columns) {
            Ok(snapshot) => snapshots.push(snapshot),
            Err(reason) => diagnostics.push(ParseDiagnostic { line, reason }),
        }
    }
    Ok((snapshots, diagnostics))
}

fn parse_row(record: &csv::StringRecord, columns: &[Column]) -> Result<StockSnapshot, String> {
    if record.len() != columns.len() {
        return Err(format!(
            "expected {} fields, found {}",
            columns.len(),
            record.len()
        ));
    }
    let mut ticker = "";
    let mut year: Option<i32> = None;
    let mut q: Option<u8> = None;
    let mut history_price: Option<f64> = None;
    let mut future_price: Option<f64> = None;
    let mut indicators: Vec<(usize, f64)> = Vec::new();

    for (column, cell) in columns.iter().zip(record.iter()) {
        match column {
            Column::Ticker => ticker = cell.trim(),
            Column::Year => {
                year = Some(
                    cell.trim()
                        .parse::<i32>()
                        .map_err(|_| format!("unparseable year `{}`", cell.trim()))?,
                );
            }
            Column::Qtr => {
                let n = cell
                    .trim()
                    .parse::<i64>()
                    .map_err(|_| format!("unparseable quarter `{}`", cell.trim()))?;
                if !(1..=4).contains(&n) {
                    return Err(format!("quarter must be 1..=4, got {n}"));
                }
                q = Some(n as u8);
            }
            Column::HistoryPrice => history_price = parse_cell(cell)?,
            Column::FuturePrice => future_price = parse_cell(cell)?,
            Column::Indicator(i) => {
                if let Some(v) = parse_cell(cell)
                    .map_err(|e| format!("{} in column `{}`", e, registry().entries()[*i].id))?
                {
                    indicators.push((*i, v));
                }
            }
        }
    }

    if ticker.is_empty() {
        return Err("ticker must not be empty".to_string());
    }
    let quarter = Quarter::new(year.unwrap(), q.unwrap()).map_err(|e| e.to_string())?;
    let history_price = history_price.ok_or("history_price is required")?;
    let mut snapshot = StockSnapshot::new(ticker, quarter, history_price, future_price)
        .map_err(|e| e.to_string())?;
    for (i, v) in indicators {
        snapshot.set_indicator(i, Some(v));
    }
    Ok(snapshot)
}

/// Writes snapshots in the full schema: ticker, quarter fields, prices,
/// then all registry indicators in order. Missing values become empty
/// cells. Output re-parses to field-identical snapshots.
pub fn write_snapshots(
    output: impl Write,
    snapshots: &[StockSnapshot],
    config: &SchemaConfig,
) -> csv::Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(config.delimiter)
        .from_writer(output);
    let mut header = vec![
        COL_TICKER.to_string(),
        COL_YEAR.to_string(),
        COL_QUARTER.to_string(),
        COL_HISTORY_PRICE.to_string(),
        COL_FUTURE_PRICE.to_string(),
    ];
    header.extend(registry().ids().map(str::to_string));
    writer.write_record(&header)?;

    let mut row = Vec::with_capacity(header.len());
    for s in snapshots {
        row.clear();
        row.push(s.ticker.clone());
        row.push(s.quarter.year().to_string());
        row.push(s.quarter.q().to_string());
        row.push(s.history_price.to_string());
        row.push(s.future_price.map(|v| v.to_string()).unwrap_or_default());
        for i in 0..registry().len() {
            row.push(s.indicator(i).map(|v| v.to_string()).unwrap_or_default());
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}
