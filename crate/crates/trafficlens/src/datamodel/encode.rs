//! Feature encoding: one-hot categoricals, standardized numerics.
//!
//! Encoding statistics (means, stds, medians, category vocabularies) are
//! computed once from the training records and frozen in [`FeatureEncoder`],
//! which is serialized next to the model so test-time encoding never leaks
//! test statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AccidentRecord, DataError, FeatureValue, SeverityLabel};

/// How an encoded column was produced from its source feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnKind {
    Numeric,
    OneHot { category: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    /// Encoded column name: the feature name for numerics,
    /// `feature=category` for one-hot columns.
    pub name: String,
    pub kind: ColumnKind,
    /// Name of the raw feature this column came from.
    pub source: String,
}

/// Row-major numeric design matrix with column provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    n_rows: usize,
    data: Vec<f64>,
    columns: Vec<ColumnMeta>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>, columns: Vec<ColumnMeta>) -> Result<Self, DataError> {
        let n_cols = columns.len();
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(DataError::Shape(format!(
                    "row {i} has {} entries, expected {n_cols}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(DataError::Value(format!("non-finite entry {bad} in row {i}")));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n_rows: rows.len(), data, columns })
    }

    /// Bare matrix with anonymous numeric columns, for data that never came
    /// from named records (toy benchmarks, generated grids).
    pub fn from_raw(rows: Vec<Vec<f64>>) -> Result<Self, DataError> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let columns = (0..n_cols)
            .map(|j| ColumnMeta {
                name: format!("x{j}"),
                kind: ColumnKind::Numeric,
                source: format!("x{j}"),
            })
            .collect();
        Self::from_rows(rows, columns)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[ColumnMeta] {
        &self.columns
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.n_cols();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols() + j]
    }

    /// New matrix holding the given rows of this one, metadata shared.
    pub fn take_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let w = self.n_cols();
        let mut data = Vec::with_capacity(indices.len() * w);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix { n_rows: indices.len(), data, columns: self.columns.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum FeatureStats {
    Numeric { mean: f64, std: f64, median: f64 },
    Categorical { categories: Vec<String> },
}

/// Frozen encoding statistics for one feature schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoder {
    /// Feature name -> frozen stats, in lexicographic feature order.
    features: BTreeMap<String, FeatureStats>,
    columns: Vec<ColumnMeta>,
}

const UNKNOWN_CATEGORY: &str = "unknown";

impl FeatureEncoder {
    /// Learn encoding statistics from training records.
    pub fn fit(records: &[AccidentRecord]) -> Result<Self, DataError> {
        if records.is_empty() {
            return Err(DataError::Value("cannot fit an encoder on zero records".into()));
        }
        let names: Vec<String> = records[0].features.keys().cloned().collect();
        for (i, rec) in records.iter().enumerate() {
            if rec.features.len() != names.len()
                || !rec.features.keys().zip(&names).all(|(a, b)| a == b)
            {
                return Err(DataError::Schema(format!(
                    "record {i} does not share the dataset feature names"
                )));
            }
        }

        let mut features = BTreeMap::new();
        for name in &names {
            let mut numerics = Vec::new();
            let mut categories = Vec::new();
            let mut saw_missing = false;
            for rec in records {
                match &rec.features[name] {
                    FeatureValue::Numeric(v) => {
                        if !v.is_finite() {
                            return Err(DataError::Value(format!(
                                "non-finite value {v} in feature {name:?}"
                            )));
                        }
                        numerics.push(*v);
                    }
                    FeatureValue::Categorical(tok) => categories.push(tok.clone()),
                    FeatureValue::Missing => saw_missing = true,
                }
            }
            let stats = match (numerics.is_empty(), categories.is_empty()) {
                (false, false) => {
                    return Err(DataError::Schema(format!(
                        "feature {name:?} mixes numeric and categorical values"
                    )))
                }
                (true, true) => {
                    return Err(DataError::Value(format!(
                        "feature {name:?} has no observed values"
                    )))
                }
                (false, true) => {
                    let mean = numerics.iter().sum::<f64>() / numerics.len() as f64;
                    let var = numerics.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                        / numerics.len() as f64;
                    // Constant columns standardize to zero rather than NaN.
                    let std = if var > 0.0 { var.sqrt() } else { 1.0 };
                    FeatureStats::Numeric { mean, std, median: median(&mut numerics) }
                }
                (true, false) => {
                    categories.sort_unstable();
                    categories.dedup();
                    if saw_missing && !categories.iter().any(|c| c == UNKNOWN_CATEGORY) {
                        categories.push(UNKNOWN_CATEGORY.to_string());
                        categories.sort_unstable();
                    }
                    FeatureStats::Categorical { categories }
                }
            };
            features.insert(name.clone(), stats);
        }

        let mut columns = Vec::new();
        for (name, stats) in &features {
            match stats {
                FeatureStats::Numeric { .. } => columns.push(ColumnMeta {
                    name: name.clone(),
                    kind: ColumnKind::Numeric,
                    source: name.clone(),
                }),
                FeatureStats::Categorical { categories } => {
                    for cat in categories {
                        columns.push(ColumnMeta {
                            name: format!("{name}={cat}"),
                            kind: ColumnKind::OneHot { category: cat.clone() },
                            source: name.clone(),
                        });
                    }
                }
            }
        }
        Ok(Self { features, columns })
    }

    pub fn columns(&self) -> &[ColumnMeta] {
        &self.columns
    }

    /// Encode records against the frozen statistics.
    pub fn transform(&self, records: &[AccidentRecord]) -> Result<FeatureMatrix, DataError> {
        let mut rows = Vec::with_capacity(records.len());
        for (i, rec) in records.iter().enumerate() {
            if rec.features.len() != self.features.len()
                || !rec.features.keys().zip(self.features.keys()).all(|(a, b)| a == b)
            {
                return Err(DataError::Schema(format!(
                    "record {i} does not match the fitted feature names"
                )));
            }
            let mut row = Vec::with_capacity(self.columns.len());
            for (name, stats) in &self.features {
                match (stats, &rec.features[name]) {
                    (FeatureStats::Numeric { mean, std, median }, value) => {
                        let raw = match value {
                            FeatureValue::Numeric(v) if v.is_finite() => *v,
                            FeatureValue::Numeric(v) => {
                                return Err(DataError::Value(format!(
                                    "non-finite value {v} in feature {name:?} (record {i})"
                                )))
                            }
                            FeatureValue::Missing => *median,
                            FeatureValue::Categorical(_) => {
                                return Err(DataError::Schema(format!(
                                    "feature {name:?} is numeric but record {i} is categorical"
                                )))
                            }
                        };
                        row.push((raw - mean) / std);
                    }
                    (FeatureStats::Categorical { categories }, value) => {
                        let token = match value {
                            FeatureValue::Categorical(tok) => tok.as_str(),
                            FeatureValue::Missing => UNKNOWN_CATEGORY,
                            FeatureValue::Numeric(_) => {
                                return Err(DataError::Schema(format!(
                                    "feature {name:?} is categorical but record {i} is numeric"
                                )))
                            }
                        };
                        let hit = categories.iter().position(|c| c == token).or_else(|| {
                            categories.iter().position(|c| c == UNKNOWN_CATEGORY)
                        });
                        let Some(hit) = hit else {
                            return Err(DataError::Value(format!(
                                "feature {name:?} has unseen category {token:?} (record {i}) \
                                 and no unknown bucket"
                            )));
                        };
                        for k in 0..categories.len() {
                            row.push(if k == hit { 1.0 } else { 0.0 });
                        }
                    }
                }
            }
            rows.push(row);
        }
        FeatureMatrix::from_rows(rows, self.columns.clone())
    }

    /// Invert an encoded matrix back to raw feature values. Numeric values
    /// come back within standardization round-off; categoricals exactly.
    pub fn inverse(
        &self,
        matrix: &FeatureMatrix,
    ) -> Result<Vec<BTreeMap<String, FeatureValue>>, DataError> {
        if matrix.n_cols() != self.columns.len() {
            return Err(DataError::Shape(format!(
                "matrix has {} columns, encoder expects {}",
                matrix.n_cols(),
                self.columns.len()
            )));
        }
        let mut out = Vec::with_capacity(matrix.n_rows());
        for i in 0..matrix.n_rows() {
            let row = matrix.row(i);
            let mut rec = BTreeMap::new();
            let mut j = 0;
            for (name, stats) in &self.features {
                match stats {
                    FeatureStats::Numeric { mean, std, .. } => {
                        rec.insert(name.clone(), FeatureValue::Numeric(row[j] * std + mean));
                        j += 1;
                    }
                    FeatureStats::Categorical { categories } => {
                        let group = &row[j..j + categories.len()];
                        let hot = group
                            .iter()
                            .position(|v| *v == 1.0)
                            .ok_or_else(|| {
                                DataError::Value(format!(
                                    "row {i}: one-hot group for {name:?} has no hot entry"
                                ))
                            })?;
                        rec.insert(
                            name.clone(),
                            FeatureValue::Categorical(categories[hot].clone()),
                        );
                        j += categories.len();
                    }
                }
            }
            out.push(rec);
        }
        Ok(out)
    }
}

/// Fit an encoder on `records` and encode them, returning the matrix and the
/// aligned label vector.
pub fn encode_features(
    records: &[AccidentRecord],
) -> Result<(FeatureMatrix, Vec<SeverityLabel>, FeatureEncoder), DataError> {
    let encoder = FeatureEncoder::fit(records)?;
    let matrix = encoder.transform(records)?;
    let labels = records.iter().map(|r| r.severity).collect();
    Ok((matrix, labels, encoder))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}
