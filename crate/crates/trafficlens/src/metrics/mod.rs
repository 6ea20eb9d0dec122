//! Classification and forecasting evaluation: confusion matrices,
//! precision/recall/F1, one-vs-rest ROC curves, and wall-clock benchmarks.

mod bench;
mod roc;

pub use bench::{bench_latency, bench_scaling, LatencyReport, ScalingRow};
pub use roc::{auc_mann_whitney, roc_curve, RocCurve};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("label error: {0}")]
    Label(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("config error: {0}")]
    Config(String),
}

/// K x K count matrix: rows are actual classes, columns predicted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub n_classes: usize,
    /// Row-major counts.
    pub counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn get(&self, actual: usize, predicted: usize) -> u64 {
        self.counts[actual * self.n_classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, actual: usize) -> u64 {
        (0..self.n_classes).map(|j| self.get(actual, j)).sum()
    }

    pub fn col_sum(&self, predicted: usize) -> u64 {
        (0..self.n_classes).map(|i| self.get(i, predicted)).sum()
    }
}

/// Tally actual/predicted label pairs into a K x K matrix.
pub fn confusion(
    actual: &[usize],
    predicted: &[usize],
    n_classes: usize,
) -> Result<ConfusionMatrix, MetricsError> {
    if actual.is_empty() || actual.len() != predicted.len() {
        return Err(MetricsError::Shape(format!(
            "confusion needs equal non-empty label lists, got {} and {}",
            actual.len(),
            predicted.len()
        )));
    }
    let mut counts = vec![0u64; n_classes * n_classes];
    for (i, (&a, &p)) in actual.iter().zip(predicted).enumerate() {
        if a >= n_classes || p >= n_classes {
            return Err(MetricsError::Label(format!(
                "sample {i}: label pair ({a}, {p}) outside 0..{n_classes}"
            )));
        }
        counts[a * n_classes + p] += 1;
    }
    Ok(ConfusionMatrix { n_classes, counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Per-class and macro-averaged precision/recall/F1 plus accuracy.
/// Divisions by zero yield 0 and set a flag naming the class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prf1 {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Human-readable notes for every zero-division fallback.
    pub zero_division_flags: Vec<String>,
}

pub fn prf1(cm: &ConfusionMatrix) -> Result<Prf1, MetricsError> {
    let total = cm.total();
    if total == 0 || cm.n_classes == 0 {
        return Err(MetricsError::Shape("empty confusion matrix".into()));
    }
    let mut per_class = Vec::with_capacity(cm.n_classes);
    let mut flags = Vec::new();
    let mut correct = 0u64;
    for k in 0..cm.n_classes {
        let tp = cm.get(k, k);
        correct += tp;
        let col = cm.col_sum(k);
        let row = cm.row_sum(k);
        let precision = if col == 0 {
            flags.push(format!("class {k}: no predictions, precision reported as 0"));
            0.0
        } else {
            tp as f64 / col as f64
        };
        let recall = if row == 0 {
            flags.push(format!("class {k}: no actual samples, recall reported as 0"));
            0.0
        } else {
            tp as f64 / row as f64
        };
        let f1 = if precision + recall == 0.0 {
            flags.push(format!("class {k}: precision + recall is 0, f1 reported as 0"));
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassMetrics { precision, recall, f1 });
    }
    let k = cm.n_classes as f64;
    Ok(Prf1 {
        accuracy: correct as f64 / total as f64,
        macro_precision: per_class.iter().map(|m| m.precision).sum::<f64>() / k,
        macro_recall: per_class.iter().map(|m| m.recall).sum::<f64>() / k,
        macro_f1: per_class.iter().map(|m| m.f1).sum::<f64>() / k,
        per_class,
        zero_division_flags: flags,
    })
}
