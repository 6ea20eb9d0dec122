//! Class balancing by seeded down- or oversampling.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{present_classes, TabularError};
use crate::datamodel::{FeatureMatrix, SeverityLabel};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BalanceStrategy {
    /// Reduce every class to the minority count, sampling without
    /// replacement. Kept rows stay in their original order.
    Downsample,
    /// Raise every class to the majority count by appending rows drawn with
    /// replacement after the originals.
    Oversample,
}

/// Equalize per-class sample counts. Deterministic given the seed; classes
/// absent from `labels` are ignored, but at least two must be present.
pub fn balance_classes(
    x: &FeatureMatrix,
    labels: &[SeverityLabel],
    strategy: BalanceStrategy,
    seed: u64,
) -> Result<(FeatureMatrix, Vec<SeverityLabel>), TabularError> {
    if labels.len() != x.n_rows() {
        return Err(TabularError::Shape(format!(
            "{} labels for {} rows",
            labels.len(),
            x.n_rows()
        )));
    }
    let classes = present_classes(labels);
    if classes.len() < 2 {
        return Err(TabularError::DegenerateLabels(
            "balancing needs at least two classes with members".into(),
        ));
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); SeverityLabel::COUNT];
    for (i, label) in labels.iter().enumerate() {
        members[label.index()].push(i);
    }
    let counts: Vec<usize> = classes.iter().map(|&k| members[k].len()).collect();

    let selected: Vec<usize> = match strategy {
        BalanceStrategy::Downsample => {
            let target = *counts.iter().min().unwrap();
            let mut keep = Vec::new();
            for &k in &classes {
                if members[k].len() == target {
                    keep.extend_from_slice(&members[k]);
                } else {
                    let mut pool = members[k].clone();
                    pool.shuffle(&mut rng::substream(seed, k as u64));
                    pool.truncate(target);
                    keep.extend_from_slice(&pool);
                }
            }
            keep.sort_unstable();
            keep
        }
        BalanceStrategy::Oversample => {
            let target = *counts.iter().max().unwrap();
            let mut keep: Vec<usize> = (0..labels.len()).collect();
            for &k in &classes {
                let mut class_rng = rng::substream(seed, k as u64);
                let pool = &members[k];
                for _ in pool.len()..target {
                    keep.push(pool[class_rng.random_range(0..pool.len())]);
                }
            }
            keep
        }
    };

    let balanced_labels = selected.iter().map(|&i| labels[i]).collect();
    Ok((x.take_rows(&selected), balanced_labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(counts: [usize; 3]) -> (FeatureMatrix, Vec<SeverityLabel>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (k, &count) in counts.iter().enumerate() {
            for i in 0..count {
                rows.push(vec![k as f64 * 1000.0 + i as f64]);
                labels.push(SeverityLabel::from_index(k).unwrap());
            }
        }
        (FeatureMatrix::from_raw(rows).unwrap(), labels)
    }

    fn class_counts(labels: &[SeverityLabel]) -> [usize; 3] {
        let mut counts = [0usize; 3];
        for label in labels {
            counts[label.index()] += 1;
        }
        counts
    }

    #[test]
    fn downsample_reduces_to_the_minority_count() {
        // The reported training distribution: Low 4231 / Medium 7532 /
        // High 2763 balances down to 2763 each, 8289 rows total.
        let (x, y) = dataset([4231, 7532, 2763]);
        let (bx, by) = balance_classes(&x, &y, BalanceStrategy::Downsample, 42).unwrap();
        assert_eq!(class_counts(&by), [2763, 2763, 2763]);
        assert_eq!(bx.n_rows(), 8289);
    }

    #[test]
    fn already_balanced_input_is_unchanged_under_downsample() {
        let (x, y) = dataset([5, 5, 5]);
        let (bx, by) = balance_classes(&x, &y, BalanceStrategy::Downsample, 7).unwrap();
        assert_eq!(by, y);
        for i in 0..x.n_rows() {
            assert_eq!(bx.row(i), x.row(i));
        }
    }

    #[test]
    fn oversample_draws_only_from_existing_rows() {
        let (x, y) = dataset([5, 2, 3]);
        let (bx, by) = balance_classes(&x, &y, BalanceStrategy::Oversample, 3).unwrap();
        assert_eq!(class_counts(&by), [5, 5, 5]);
        // Every appended Medium row must be one of the two originals.
        for i in 0..bx.n_rows() {
            if by[i] == SeverityLabel::Medium {
                let v = bx.row(i)[0];
                assert!(v == 1000.0 || v == 1001.0, "unexpected row value {v}");
            }
        }
    }

    #[test]
    fn balancing_is_deterministic_per_seed() {
        let (x, y) = dataset([50, 20, 35]);
        let a = balance_classes(&x, &y, BalanceStrategy::Downsample, 11).unwrap();
        let b = balance_classes(&x, &y, BalanceStrategy::Downsample, 11).unwrap();
        assert_eq!(a.1, b.1);
        for i in 0..a.0.n_rows() {
            assert_eq!(a.0.row(i), b.0.row(i));
        }
    }

    #[test]
    fn single_class_is_degenerate() {
        let (x, y) = dataset([4, 0, 0]);
        assert!(matches!(
            balance_classes(&x, &y, BalanceStrategy::Downsample, 1),
            Err(TabularError::DegenerateLabels(_))
        ));
    }
}
