//! One-vs-rest ROC curves.
//!
//! The area is computed two independent ways — trapezoidal rule over the
//! threshold sweep, and the Mann-Whitney pairwise statistic with half
//! credit for ties — which must agree to 1e-9. Keeping both routes public
//! lets the test suite hold one against the other.

use serde::{Deserialize, Serialize};

use super::MetricsError;

/// (false-positive rate, true-positive rate) points from (0,0) to (1,1),
/// non-decreasing in both coordinates, plus the trapezoidal area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// Sweep thresholds over the sorted unique scores (descending). Tied
/// scores advance the curve in one step, which is what makes the
/// trapezoidal area equal the tie-aware pairwise statistic.
pub fn roc_curve(scores: &[f64], actual: &[bool]) -> Result<RocCurve, MetricsError> {
    validate(scores, actual)?;
    let positives = actual.iter().filter(|a| **a).count() as f64;
    let negatives = actual.len() as f64 - positives;

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());

    let mut points = vec![(0.0, 0.0)];
    let mut auc = 0.0;
    let (mut tp, mut fp) = (0u64, 0u64);
    let (mut last_fpr, mut last_tpr) = (0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        // Consume the whole block of equal scores before emitting a point.
        let score = scores[order[i]];
        while i < order.len() && scores[order[i]] == score {
            if actual[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let fpr = fp as f64 / negatives;
        let tpr = tp as f64 / positives;
        auc += (fpr - last_fpr) * (tpr + last_tpr) / 2.0;
        points.push((fpr, tpr));
        last_fpr = fpr;
        last_tpr = tpr;
    }
    debug_assert_eq!(points.last(), Some(&(1.0, 1.0)));
    Ok(RocCurve { points, auc })
}

/// Probability that a random positive outscores a random negative, ties
/// counting half: the Mann-Whitney U statistic normalized by the pair
/// count. Quadratic on purpose; it is the oracle, not the fast path.
pub fn auc_mann_whitney(scores: &[f64], actual: &[bool]) -> Result<f64, MetricsError> {
    validate(scores, actual)?;
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &positive) in actual.iter().enumerate() {
        if !positive {
            continue;
        }
        for (j, &other) in actual.iter().enumerate() {
            if other {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    Ok(wins / pairs)
}

fn validate(scores: &[f64], actual: &[bool]) -> Result<(), MetricsError> {
    if scores.is_empty() || scores.len() != actual.len() {
        return Err(MetricsError::Shape(format!(
            "{} scores for {} labels",
            scores.len(),
            actual.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(MetricsError::Shape("scores must be finite".into()));
    }
    let positives = actual.iter().filter(|a| **a).count();
    if positives == 0 || positives == actual.len() {
        return Err(MetricsError::Degenerate(
            "ROC needs both positive and negative samples".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn perfectly_separating_scores_have_auc_one() {
        let scores = [0.9, 0.8, 0.2, 0.1];
        let actual = [true, true, false, false];
        let curve = roc_curve(&scores, &actual).unwrap();
        assert_eq!(curve.auc, 1.0);
        assert_eq!(curve.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(curve.points.last(), Some(&(1.0, 1.0)));
    }

    #[test]
    fn constant_scores_have_auc_half() {
        let scores = [0.5; 6];
        let actual = [true, false, true, false, true, false];
        let curve = roc_curve(&scores, &actual).unwrap();
        assert!((curve.auc - 0.5).abs() < 1e-12);
        assert!((auc_mann_whitney(&scores, &actual).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn four_sample_case_matches_the_pairwise_enumeration() {
        // Pairs: (0.9 vs 0.8) win, (0.9 vs 0.3) win, (0.4 vs 0.8) loss,
        // (0.4 vs 0.3) win -> 3 of 4 = 0.75.
        let scores = [0.9, 0.8, 0.4, 0.3];
        let actual = [true, false, true, false];
        assert!((roc_curve(&scores, &actual).unwrap().auc - 0.75).abs() < 1e-12);
        assert!((auc_mann_whitney(&scores, &actual).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_equals_mann_whitney_on_random_draws() {
        let mut generator = rng::seeded(1234);
        for trial in 0..100 {
            let n = generator.random_range(5..60);
            // Quantized scores force plenty of ties.
            let scores: Vec<f64> =
                (0..n).map(|_| (generator.random_range(0..10) as f64) / 10.0).collect();
            let mut actual: Vec<bool> = (0..n).map(|_| generator.random::<bool>()).collect();
            actual[0] = true;
            actual[1] = false;
            let sweep = roc_curve(&scores, &actual).unwrap().auc;
            let pairwise = auc_mann_whitney(&scores, &actual).unwrap();
            assert!(
                (sweep - pairwise).abs() < 1e-9,
                "trial {trial}: {sweep} vs {pairwise}"
            );
        }
    }

    #[test]
    fn curve_is_monotone_from_origin_to_one_one() {
        let mut generator = rng::seeded(77);
        let scores: Vec<f64> = (0..50).map(|_| generator.random::<f64>()).collect();
        let mut actual: Vec<bool> = (0..50).map(|_| generator.random::<bool>()).collect();
        actual[0] = true;
        actual[1] = false;
        let curve = roc_curve(&scores, &actual).unwrap();
        assert_eq!(curve.points[0], (0.0, 0.0));
        assert_eq!(*curve.points.last().unwrap(), (1.0, 1.0));
        for pair in curve.points.windows(2) {
            assert!(pair[1].0 >= pair[0].0);
            assert!(pair[1].1 >= pair[0].1);
        }
        assert!((0.0..=1.0).contains(&curve.auc));
    }

    #[test]
    fn single_class_input_is_degenerate() {
        assert!(matches!(
            roc_curve(&[0.1, 0.2], &[true, true]),
            Err(MetricsError::Degenerate(_))
        ));
    }
}
