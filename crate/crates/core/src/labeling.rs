//! Horizon-return labeling, dataset assembly, and class balancing.
//!
//! A snapshot is labeled by comparing its quarter-end price with the same
//! stock's price a fixed number of quarters later: `Good` when the later
//! price reaches the growth threshold (10% in one year by default), `Bad`
//! otherwise. Each history quarter with a matching horizon price becomes
//! its own dataset row, and classes are balanced by uniformly downsampling
//! the majority class.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};

use rand::Rng;
use thiserror::Error;

use crate::features::{FeatureId, FeatureSet, FeatureVector, SENTINEL};
use crate::seeds;
use crate::snapshot::{ParseDiagnostic, Quarter, SchemaConfig, StockSnapshot};

/// Binary movement class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Good,
    Bad,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Good => "Good",
            Label::Bad => "Bad",
        }
    }

    pub fn parse(text: &str) -> Option<Label> {
        match text {
            "Good" => Some(Label::Good),
            "Bad" => Some(Label::Bad),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One labeled dataset row, traceable to its source company-quarter.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub vector: FeatureVector,
    pub label: Label,
    pub ticker: String,
    pub quarter: Quarter,
}

/// A feature set plus aligned labeled examples with unique provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: FeatureSet,
    examples: Vec<LabeledExample>,
}

#[derive(Debug, Error, PartialEq)]
pub enum LabelingError {
    #[error("price must be positive, got {0}")]
    NonPositivePrice(f64),
    #[error("growth threshold must be greater than -1, got {0}")]
    InvalidThreshold(f64),
    #[error("horizon must be at least 1 quarter")]
    InvalidHorizon,
    #[error("duplicate company-quarter {ticker} {quarter}")]
    DuplicateProvenance { ticker: String, quarter: Quarter },
    #[error("example {index} has {got} values but the feature set has {expected}")]
    VectorMisaligned {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("no snapshot had a usable price {horizon} quarters ahead")]
    EmptyDataset { horizon: u32 },
    #[error("cannot balance: no examples labeled {0}")]
    EmptyClass(Label),
}

impl LabeledDataset {
    /// Validates alignment and provenance uniqueness.
    pub fn new(
        features: FeatureSet,
        examples: Vec<LabeledExample>,
    ) -> Result<LabeledDataset, LabelingError> {
        let expected = features.len();
        for (index, ex) in examples.iter().enumerate() {
            if ex.vector.len() != expected {
                return Err(LabelingError::VectorMisaligned {
                    index,
                    got: ex.vector.len(),
                    expected,
                });
            }
        }
        let mut seen: HashMap<(&str, Quarter), ()> = HashMap::with_capacity(examples.len());
        for ex in &examples {
            if seen.insert((ex.ticker.as_str(), ex.quarter), ()).is_some() {
                return Err(LabelingError::DuplicateProvenance {
                    ticker: ex.ticker.clone(),
                    quarter: ex.quarter,
                });
            }
        }
        Ok(LabeledDataset { features, examples })
    }

    pub fn features(&self) -> &FeatureSet {
        &self.features
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// (#Good, #Bad).
    pub fn class_counts(&self) -> (usize, usize) {
        let good = self
            .examples
            .iter()
            .filter(|e| e.label == Label::Good)
            .count();
        (good, self.examples.len() - good)
    }

    /// A new dataset holding the rows at `indices`, in that order.
    /// Indices must be in range and pairwise distinct.
    pub fn select(&self, indices: &[usize]) -> LabeledDataset {
        let examples = indices.iter().map(|i| self.examples[*i].clone()).collect();
        LabeledDataset {
            features: self.features.clone(),
            examples,
        }
    }

    /// A copy of this dataset projected onto a subset of its features.
    pub fn project(&self, to: &FeatureSet) -> LabeledDataset {
        let examples = self
            .examples
            .iter()
            .map(|ex| LabeledExample {
                vector: ex.vector.project(&self.features, to),
                label: ex.label,
                ticker: ex.ticker.clone(),
                quarter: ex.quarter,
            })
            .collect();
        LabeledDataset {
            features: to.clone(),
            examples,
        }
    }
}

fn check_labeling_inputs(
    history_price: f64,
    future_price: f64,
    threshold: f64,
) -> Result<(), LabelingError> {
    for p in [history_price, future_price] {
        if !(p.is_finite() && p > 0.0) {
            return Err(LabelingError::NonPositivePrice(p));
        }
    }
    if !(threshold.is_finite() && threshold > -1.0) {
        return Err(LabelingError::InvalidThreshold(threshold));
    }
    Ok(())
}

/// Labels a price move: `Good` when the later price reaches
/// `(1 + threshold) x history_price`. The boundary itself counts as
/// reaching the target; use [`label_move_strict`] to require exceeding it.
pub fn label_move(
    history_price: f64,
    future_price: f64,
    threshold: f64,
) -> Result<Label, LabelingError> {
    check_labeling_inputs(history_price, future_price, threshold)?;
    // Compared as a growth ratio, not as future >= (1+t)·history: the
    // division keeps the boundary exact for decimal inputs (110 vs 100
    // at 10%) and makes the label invariant to price rescaling.
    Ok(if future_price / history_price >= 1.0 + threshold {
        Label::Good
    } else {
        Label::Bad
    })
}

/// Boundary-exclusive variant: `Good` only when the later price strictly
/// exceeds the target.
pub fn label_move_strict(
    history_price: f64,
    future_price: f64,
    threshold: f64,
) -> Result<Label, LabelingError> {
    check_labeling_inputs(history_price, future_price, threshold)?;
    Ok(if future_price / history_price > 1.0 + threshold {
        Label::Good
    } else {
        Label::Bad
    })
}

/// Knobs for [`build_dataset`].
#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Quarters between the history price and the comparison price.
    pub horizon_quarters: u32,
    /// Required relative growth for a `Good` label.
    pub threshold: f64,
    /// Require strictly exceeding the target instead of reaching it.
    pub strict_boundary: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            horizon_quarters: 4,
            threshold: 0.10,
            strict_boundary: false,
        }
    }
}

/// [`build_dataset`] result: the dataset plus how many snapshots lacked a
/// horizon price. `dataset.len() + dropped` always equals the input size.
#[derive(Debug)]
pub struct BuildOutcome {
    pub dataset: LabeledDataset,
    pub dropped: usize,
}

/// Assembles a labeled dataset from snapshots.
///
/// For a snapshot of ticker T at quarter Q, the horizon price is the
/// history price of T's snapshot at Q + horizon. When that snapshot is
/// absent and the horizon is exactly four quarters, the snapshot's own
/// recorded one-year-later price fills in. Snapshots with no horizon
/// price are dropped and counted. Each history quarter that resolves
/// produces its own row, so a ticker observed over several quarters
/// contributes several rows.
pub fn build_dataset(
    snapshots: &[StockSnapshot],
    features: &FeatureSet,
    options: &BuildOptions,
) -> Result<BuildOutcome, LabelingError> {
    if options.horizon_quarters < 1 {
        return Err(LabelingError::InvalidHorizon);
    }
    if !(options.threshold.is_finite() && options.threshold > -1.0) {
        return Err(LabelingError::InvalidThreshold(options.threshold));
    }

    let mut price_at: HashMap<(&str, Quarter), f64> = HashMap::with_capacity(snapshots.len());
    for s in snapshots {
        if price_at
            .insert((s.ticker.as_str(), s.quarter), s.history_price())
            .is_some()
        {
            return Err(LabelingError::DuplicateProvenance {
                ticker: s.ticker.clone(),
                quarter: s.quarter,
            });
        }
    }

    let label = if options.strict_boundary {
        label_move_strict
    } else {
        label_move
    };
    let mut examples = Vec::new();
    let mut dropped = 0usize;
    for s in snapshots {
        let target = s.quarter.plus_quarters(options.horizon_quarters);
        let horizon_price = price_at
            .get(&(s.ticker.as_str(), target))
            .copied()
            .or_else(|| {
                // The recorded future price means "four quarters later",
                // so it only substitutes at that horizon.
                (options.horizon_quarters == 4)
                    .then(|| s.future_price())
                    .flatten()
            });
        match horizon_price {
            Some(fp) => examples.push(LabeledExample {
                vector: s.to_feature_vector(features),
                label: label(s.history_price(), fp, options.threshold)?,
                ticker: s.ticker.clone(),
                quarter: s.quarter,
            }),
            None => dropped += 1,
        }
    }
    if examples.is_empty() {
        return Err(LabelingError::EmptyDataset {
            horizon: options.horizon_quarters,
        });
    }
    let dataset = LabeledDataset::new(features.clone(), examples)?;
    Ok(BuildOutcome { dataset, dropped })
}

/// Equalizes class counts by downsampling the majority class uniformly at
/// random. The minority class is kept whole, and surviving rows keep their
/// original relative order, so the result is deterministic given the seed.
pub fn balance(dataset: &LabeledDataset, seed: u64) -> Result<LabeledDataset, LabelingError> {
    let (good, bad) = dataset.class_counts();
    if good == 0 {
        return Err(LabelingError::EmptyClass(Label::Good));
    }
    if bad == 0 {
        return Err(LabelingError::EmptyClass(Label::Bad));
    }
    if good == bad {
        return Ok(dataset.clone());
    }
    let majority = if good > bad { Label::Good } else { Label::Bad };
    let keep_count = good.min(bad);

    let mut majority_rows: Vec<usize> = dataset
        .examples()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.label == majority)
        .map(|(i, _)| i)
        .collect();
    // Partial Fisher-Yates: the first keep_count slots become a uniform
    // sample without replacement.
    let mut rng = seeds::stream(seed, "balance", 0);
    for i in 0..keep_count {
        let j = rng.gen_range(i..majority_rows.len());
        majority_rows.swap(i, j);
    }
    majority_rows.truncate(keep_count);

    let mut keep: Vec<usize> = dataset
        .examples()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.label != majority)
        .map(|(i, _)| i)
        .collect();
    keep.extend(majority_rows);
    keep.sort_unstable();
    Ok(dataset.select(&keep))
}

const COL_LABEL: &str = "label";
const COL_TICKER: &str = "ticker";
const COL_YEAR: &str = "year";
const COL_QUARTER: &str = "quarter";

#[derive(Debug, Error)]
pub enum LabeledFileError {
    #[error("missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("file has no feature columns")]
    NoFeatures,
    #[error("file contains no usable rows")]
    Empty,
    #[error("failed to read input: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Dataset(#[from] LabelingError),
    #[error(transparent)]
    Features(#[from] crate::features::FeatureSetError),
}

/// Writes a labeled dataset as delimited text: feature columns in
/// canonical order (missing values as the sentinel literal), then
/// `label`, `ticker`, `year`, `quarter`.
pub fn write_labeled(
    output: impl Write,
    dataset: &LabeledDataset,
    config: &SchemaConfig,
) -> csv::Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(config.delimiter)
        .from_writer(output);
    let mut header: Vec<String> = dataset.features().names().map(str::to_string).collect();
    header.extend(
        [COL_LABEL, COL_TICKER, COL_YEAR, COL_QUARTER]
            .iter()
            .map(|s| s.to_string()),
    );
    writer.write_record(&header)?;

    let mut row = Vec::with_capacity(header.len());
    for ex in dataset.examples() {
        row.clear();
        row.extend(ex.vector.values().iter().map(|v| v.to_string()));
        row.push(ex.label.as_str().to_string());
        row.push(ex.ticker.clone());
        row.push(ex.quarter.year().to_string());
        row.push(ex.quarter.q().to_string());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a labeled-dataset file. The feature set is every non-reserved
/// header column, normalized to canonical order. Rows with unparseable
/// cells are skipped with a diagnostic; a file yielding no rows is an
/// error.
pub fn read_labeled(
    input: impl Read,
    config: &SchemaConfig,
) -> Result<(LabeledDataset, Vec<ParseDiagnostic>), LabeledFileError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(config.delimiter)
        .flexible(true)
        .has_headers(true)
        .from_reader(input);
    let header = reader.headers()?.clone();

    // Column roles: Some(feature) or one of the four reserved columns.
    enum Role {
        Feature(FeatureId),
        LabelCol,
        TickerCol,
        YearCol,
        QuarterCol,
    }
    let mut roles = Vec::with_capacity(header.len());
    let mut feature_ids = Vec::new();
    let mut seen_reserved = [false; 4];
    for name in header.iter() {
        let role = match name {
            COL_LABEL => Role::LabelCol,
            COL_TICKER => Role::TickerCol,
            COL_YEAR => Role::YearCol,
            COL_QUARTER => Role::QuarterCol,
            other => match FeatureId::parse(other) {
                Some(id) => {
                    if feature_ids.contains(&id) {
                        return Err(LabeledFileError::DuplicateColumn(other.to_string()));
                    }
                    feature_ids.push(id);
                    Role::Feature(id)
                }
                None => return Err(LabeledFileError::UnknownColumn(other.to_string())),
            },
        };
        let slot = match role {
            Role::LabelCol => Some(0),
            Role::TickerCol => Some(1),
            Role::YearCol => Some(2),
            Role::QuarterCol => Some(3),
            Role::Feature(_) => None,
        };
        if let Some(s) = slot {
            if std::mem::replace(&mut seen_reserved[s], true) {
                return Err(LabeledFileError::DuplicateColumn(name.to_string()));
            }
        }
        roles.push(role);
    }
    for (name, present) in [COL_LABEL, COL_TICKER, COL_YEAR, COL_QUARTER]
        .iter()
        .zip(seen_reserved)
    {
        if !present {
            return Err(LabeledFileError::MissingColumn(name));
        }
    }
    if feature_ids.is_empty() {
        return Err(LabeledFileError::NoFeatures);
    }
    let features = FeatureSet::new(feature_ids)?;

    let mut examples = Vec::new();
    let mut diagnostics = Vec::new();
    'rows: for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let skip = |reason: String, diagnostics: &mut Vec<ParseDiagnostic>| {
            diagnostics.push(ParseDiagnostic { line, reason });
        };
        if record.len() != roles.len() {
            skip(
                format!("expected {} fields, found {}", roles.len(), record.len()),
                &mut diagnostics,
            );
            continue;
        }
        let mut slots = vec![SENTINEL; features.len()];
        let mut label = None;
        let mut ticker = String::new();
        let mut year: Option<i32> = None;
        let mut q: Option<u8> = None;
        for (role, cell) in roles.iter().zip(record.iter()) {
            let cell = cell.trim();
            match role {
                Role::Feature(id) => {
                    let value = if cell.is_empty() {
                        None
                    } else {
                        match cell.parse::<f64>() {
                            Ok(v) => Some(v),
                            Err(_) => {
                                skip(
                                    format!("unparseable number `{}` in `{}`", cell, id.name()),
                                    &mut diagnostics,
                                );
                                continue 'rows;
                            }
                        }
                    };
                    slots[features.index_of(*id).unwrap()] = FeatureVector::encode(value);
                }
                Role::LabelCol => match Label::parse(cell) {
                    Some(l) => label = Some(l),
                    None => {
                        skip(format!("unknown label `{cell}`"), &mut diagnostics);
                        continue 'rows;
                    }
                },
                Role::TickerCol => ticker = cell.to_string(),
                Role::YearCol => match cell.parse::<i32>() {
                    Ok(y) => year = Some(y),
                    Err(_) => {
                        skip(format!("unparseable year `{cell}`"), &mut diagnostics);
                        continue 'rows;
                    }
                },
                Role::QuarterCol => match cell.parse::<u8>() {
                    Ok(n) => q = Some(n),
                    Err(_) => {
                        skip(format!("unparseable quarter `{cell}`"), &mut diagnostics);
                        continue 'rows;
                    }
                },
            }
        }
        let quarter = match Quarter::new(year.unwrap_or(0), q.unwrap_or(0)) {
            Ok(qt) => qt,
            Err(e) => {
                skip(e.to_string(), &mut diagnostics);
                continue;
            }
        };
        if ticker.is_empty() {
            skip("ticker must not be empty".to_string(), &mut diagnostics);
            continue;
        }
        examples.push(LabeledExample {
            vector: FeatureVector::from_encoded(slots),
            label: label.unwrap(),
            ticker,
            quarter,
        });
    }
    if examples.is_empty() {
        return Err(LabeledFileError::Empty);
    }
    let dataset = LabeledDataset::new(features, examples)?;
    Ok((dataset, diagnostics))
}
