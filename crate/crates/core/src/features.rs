//! Feature sets and sentinel-encoded feature vectors.
//!
//! A feature is either one of the 28 registry indicators or the
//! `history_price` pseudo-feature. Feature sets keep a canonical order:
//! registry order first, `history_price` last. Missing values inside a
//! vector are encoded with the sentinel `-9999`; a stored value exactly
//! equal to the sentinel is deliberately reclassified as missing, making
//! the overloaded literal explicit.

use crate::indicators::registry;
use thiserror::Error;

/// The reserved literal that marks a missing value inside a feature vector.
pub const SENTINEL: f64 = -9999.0;

/// Column name of the pseudo-feature carrying the snapshot's own price.
pub const HISTORY_PRICE: &str = "history_price";

/// Identifies one feature: a registry indicator or the price pseudo-feature.
///
/// The derived ordering is the canonical feature order (registry order,
/// `history_price` last).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureId {
    /// Index into the indicator registry.
    Indicator(usize),
    /// The snapshot's quarter-end price.
    HistoryPrice,
}

impl FeatureId {
    /// Resolves a column name to a feature id.
    pub fn parse(name: &str) -> Option<FeatureId> {
        if name == HISTORY_PRICE {
            return Some(FeatureId::HistoryPrice);
        }
        registry().index_of(name).map(FeatureId::Indicator)
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureId::Indicator(i) => registry().entries()[i].id,
            FeatureId::HistoryPrice => HISTORY_PRICE,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureSetError {
    #[error("feature set must not be empty")]
    Empty,
    #[error("duplicate feature `{0}`")]
    Duplicate(String),
    #[error("unknown feature `{0}`")]
    Unknown(String),
}

/// An ordered, duplicate-free set of features in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSet {
    members: Vec<FeatureId>,
}

impl FeatureSet {
    /// All 28 indicators plus `history_price` (29 features).
    pub fn full() -> FeatureSet {
        let mut members: Vec<FeatureId> = (0..registry().len()).map(FeatureId::Indicator).collect();
        members.push(FeatureId::HistoryPrice);
        FeatureSet { members }
    }

    /// Builds a set from ids, normalizing to canonical order.
    pub fn new(ids: impl IntoIterator<Item = FeatureId>) -> Result<FeatureSet, FeatureSetError> {
        let mut members: Vec<FeatureId> = ids.into_iter().collect();
        members.sort();
        if members.is_empty() {
            return Err(FeatureSetError::Empty);
        }
        if let Some(dup) = members.windows(2).find(|w| w[0] == w[1]) {
            return Err(FeatureSetError::Duplicate(dup[0].name().to_string()));
        }
        Ok(FeatureSet { members })
    }

    /// Builds a set from column names.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<FeatureSet, FeatureSetError> {
        let ids = names
            .iter()
            .map(|n| {
                FeatureId::parse(n.as_ref())
                    .ok_or_else(|| FeatureSetError::Unknown(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        FeatureSet::new(ids)
    }

    pub fn members(&self) -> &[FeatureId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: FeatureId) -> bool {
        self.members.binary_search(&id).is_ok()
    }

    pub fn index_of(&self, id: FeatureId) -> Option<usize> {
        self.members.binary_search(&id).ok()
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.members.iter().map(|m| m.name())
    }

    /// The set with `id` removed. Errors if `id` is absent or the result
    /// would be empty.
    pub fn without(&self, id: FeatureId) -> Result<FeatureSet, FeatureSetError> {
        let pos = self
            .index_of(id)
            .ok_or_else(|| FeatureSetError::Unknown(id.name().to_string()))?;
        if self.members.len() == 1 {
            return Err(FeatureSetError::Empty);
        }
        let mut members = self.members.clone();
        members.remove(pos);
        Ok(FeatureSet { members })
    }
}

/// Dense vector of feature values aligned to a [`FeatureSet`].
///
/// Every slot holds either a finite value or [`SENTINEL`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    /// Encodes one optional value: absent, non-finite, and exactly-sentinel
    /// inputs all map to the sentinel.
    pub fn encode(value: Option<f64>) -> f64 {
        match value {
            Some(v) if v.is_finite() && v != SENTINEL => v,
            _ => SENTINEL,
        }
    }

    /// Builds a vector from already-encoded slots.
    pub fn from_encoded(values: Vec<f64>) -> FeatureVector {
        debug_assert!(values
            .iter()
            .all(|v| *v == SENTINEL || (v.is_finite() && *v != SENTINEL)));
        FeatureVector { values }
    }

    pub fn from_options(values: impl IntoIterator<Item = Option<f64>>) -> FeatureVector {
        FeatureVector {
            values: values.into_iter().map(FeatureVector::encode).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_missing(&self, i: usize) -> bool {
        self.values[i] == SENTINEL
    }

    /// The value at `i`, or `None` when missing.
    pub fn get(&self, i: usize) -> Option<f64> {
        let v = self.values[i];
        (v != SENTINEL).then_some(v)
    }

    /// Raw sentinel-encoded slots.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Projects the vector from `from` onto the subset `to`.
    ///
    /// Panics if `to` is not a subset of `from` or lengths are misaligned;
    /// projection is an internal step over already-validated sets.
    pub fn project(&self, from: &FeatureSet, to: &FeatureSet) -> FeatureVector {
        assert_eq!(self.values.len(), from.len(), "vector not aligned");
        let values = to
            .members()
            .iter()
            .map(|id| {
                let i = from.index_of(*id).expect("projection target not a subset");
                self.values[i]
            })
            .collect();
        FeatureVector { values }
    }
}
