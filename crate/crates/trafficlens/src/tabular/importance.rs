//! Gain-based feature importance with one-hot columns folded back into
//! their source features.

use serde::{Deserialize, Serialize};

use super::TabularError;
use crate::datamodel::ColumnMeta;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub feature: String,
    pub gain: f64,
}

/// Source features ordered by descending total split gain, ties broken by
/// name. A model without any splits produces an empty report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub entries: Vec<ImportanceEntry>,
}

impl ImportanceReport {
    pub fn top(&self, count: usize) -> impl Iterator<Item = &ImportanceEntry> {
        self.entries.iter().take(count)
    }
}

/// Aggregate per-column split gain into per-source-feature totals.
pub fn feature_importance(
    gain_by_column: &[f64],
    columns: &[ColumnMeta],
) -> Result<ImportanceReport, TabularError> {
    if gain_by_column.len() != columns.len() {
        return Err(TabularError::Shape(format!(
            "{} gain entries for {} columns",
            gain_by_column.len(),
            columns.len()
        )));
    }
    if gain_by_column.iter().all(|g| *g == 0.0) {
        return Ok(ImportanceReport { entries: Vec::new() });
    }

    let mut totals: Vec<(String, f64)> = Vec::new();
    for (gain, meta) in gain_by_column.iter().zip(columns) {
        match totals.iter_mut().find(|(name, _)| name == &meta.source) {
            Some((_, sum)) => *sum += gain,
            None => totals.push((meta.source.clone(), *gain)),
        }
    }
    totals.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    Ok(ImportanceReport {
        entries: totals.into_iter().map(|(feature, gain)| ImportanceEntry { feature, gain }).collect(),
    })
}
