//! The fixed registry of quarterly fundamental indicators.
//!
//! Snapshot files name their indicator columns by the ids below. The ten
//! vendor-style uppercase tokens (`DIVIDEND_YIELD`, `PE_RATIO`, ...) are the
//! machine-readable names commonly attached to those quantities in terminal
//! exports; the remaining ids are snake-case derivations of the indicator
//! names. `history_price` is not an indicator — it is carried separately on
//! every snapshot and enters feature vectors as a pseudo-feature.

use std::sync::OnceLock;

/// Measurement unit of an indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    /// An amount of money (raw currency units, no normalization).
    Currency,
    /// A dimensionless quotient.
    Ratio,
    /// A percentage.
    Percent,
    /// An integer-valued quantity.
    Count,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Currency => "currency",
            Unit::Ratio => "ratio",
            Unit::Percent => "percent",
            Unit::Count => "count",
        }
    }
}

/// One registry entry.
#[derive(Debug, Clone, Copy)]
pub struct Indicator {
    pub id: &'static str,
    pub description: &'static str,
    pub unit: Unit,
}

/// The ordered, fixed set of 28 indicators.
#[derive(Debug)]
pub struct IndicatorRegistry {
    entries: Vec<Indicator>,
}

const fn ind(id: &'static str, description: &'static str, unit: Unit) -> Indicator {
    Indicator {
        id,
        description,
        unit,
    }
}

fn build_entries() -> Vec<Indicator> {
    use Unit::*;
    vec![
        ind(
            "book_value",
            "Net asset value: total assets minus intangible assets and liabilities",
            Currency,
        ),
        ind(
            "market_cap",
            "Market value of issued share capital: share price times shares outstanding",
            Currency,
        ),
        ind(
            "net_price_change_1m",
            "Change of net price over the trailing one-month period",
            Currency,
        ),
        ind(
            "net_price_pct_change_1m",
            "Percentage change of net price over the trailing one-month period",
            Percent,
        ),
        ind(
            "DIVIDEND_YIELD",
            "Annual dividends paid relative to share price",
            Percent,
        ),
        ind(
            "BEST_EPS",
            "Earnings per share: profit divided by the number of issued shares",
            Currency,
        ),
        ind(
            "eps_growth",
            "Growth of earnings per share over the trailing one-year period",
            Percent,
        ),
        ind(
            "sales_revenue_turnover",
            "Sales revenue turnover; stored as reported, no standard definition",
            Currency,
        ),
        ind(
            "net_revenue",
            "Proceeds from sales minus commissions, taxes, and related expenses",
            Currency,
        ),
        ind(
            "net_revenue_growth",
            "Growth of net revenue over the trailing one-year period",
            Percent,
        ),
        ind(
            "sales_growth",
            "Sales growth over the trailing one-year period",
            Percent,
        ),
        ind(
            "PE_RATIO",
            "Current share price relative to per-share earnings",
            Ratio,
        ),
        ind(
            "pe_ratio_5yr_avg",
            "Price-to-earnings ratio averaged over five years",
            Ratio,
        ),
        ind(
            "PX_TO_BOOK_RATIO",
            "Current market price relative to book value",
            Ratio,
        ),
        ind(
            "px_to_sales_ratio",
            "Market capitalization divided by most-recent-year revenue",
            Ratio,
        ),
        ind(
            "BEST_DPS",
            "Dividends per share: total dividends over a year divided by ordinary shares issued",
            Currency,
        ),
        ind(
            "CUR_RATIO",
            "Current assets relative to current liabilities",
            Ratio,
        ),
        ind(
            "QUICK_RATIO",
            "Cash, marketable securities, and receivables relative to current liabilities",
            Ratio,
        ),
        ind(
            "TOT_DEBT_TO_TOT_EQY",
            "Financial leverage: total liabilities divided by stockholders' equity",
            Ratio,
        ),
        ind(
            "analyst_ratio",
            "Rating assigned by human analysts; scale as reported",
            Ratio,
        ),
        ind(
            "revenue_growth_5yr_cagr",
            "Revenue growth adjusted by five-year compound annual growth rate",
            Percent,
        ),
        ind("profit_margin", "Net income divided by revenue", Percent),
        ind(
            "operating_margin",
            "Share of revenue left after variable production costs",
            Percent,
        ),
        ind(
            "return_on_equity",
            "Net income relative to shareholders' equity",
            Percent,
        ),
        ind(
            "return_on_assets",
            "Net income relative to total assets",
            Percent,
        ),
        ind(
            "gross_margin",
            "Revenue minus cost of goods sold, relative to revenue",
            Percent,
        ),
        ind(
            "interest_coverage",
            "Operating earnings relative to interest expense",
            Ratio,
        ),
        ind(
            "asset_turnover",
            "Sales or revenue generated relative to asset value",
            Ratio,
        ),
    ]
}

impl IndicatorRegistry {
    pub fn entries(&self) -> &[Indicator] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index_of(id).is_some()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.iter().map(|e| e.id)
    }
}

/// Returns the fixed 28-entry indicator registry.
pub fn registry() -> &'static IndicatorRegistry {
    static REGISTRY: OnceLock<IndicatorRegistry> = OnceLock::new();
    REGISTRY.get_or_init(|| IndicatorRegistry {
        entries: build_entries(),
    })
}
