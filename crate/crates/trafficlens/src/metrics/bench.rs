//! Wall-clock benchmarks: single-sample inference latency and training-time
//! scaling.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Per-call latency statistics over single-sample predictions,
/// nearest-rank percentiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub repetitions: usize,
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
    /// Where the numbers were taken; latency is hardware-bound.
    pub hardware: String,
}

/// Time `predict` over single samples drawn round-robin from `0..n_samples`,
/// excluding 10 warm-up calls. `repetitions` must be at least 30.
pub fn bench_latency<F: FnMut(usize)>(
    n_samples: usize,
    repetitions: usize,
    mut predict: F,
) -> Result<LatencyReport, MetricsError> {
    if repetitions < 30 {
        return Err(MetricsError::Config(format!(
            "need at least 30 repetitions for stable percentiles, got {repetitions}"
        )));
    }
    if n_samples == 0 {
        return Err(MetricsError::Shape("no samples to predict".into()));
    }
    for i in 0..10 {
        predict(i % n_samples);
    }
    let mut samples_ms = Vec::with_capacity(repetitions);
    for i in 0..repetitions {
        let start = Instant::now();
        predict(i % n_samples);
        samples_ms.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let mean_ms = samples_ms.iter().sum::<f64>() / repetitions as f64;
    samples_ms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(LatencyReport {
        repetitions,
        mean_ms,
        p50_ms: percentile(&samples_ms, 0.50),
        p95_ms: percentile(&samples_ms, 0.95),
        hardware: format!("{} {}", std::env::consts::OS, std::env::consts::ARCH),
    })
}

/// Nearest-rank percentile of an ascending-sorted sample.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub size: usize,
    pub seconds: f64,
}

/// Wall-clock training time at each dataset size. `train_at` builds the
/// seeded dataset of the given size and fits on it.
pub fn bench_scaling<F: FnMut(usize)>(
    sizes: &[usize],
    mut train_at: F,
) -> Result<Vec<ScalingRow>, MetricsError> {
    if sizes.is_empty() {
        return Err(MetricsError::Config("no sizes to benchmark".into()));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MetricsError::Config("sizes must be strictly ascending".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let start = Instant::now();
        train_at(size);
        rows.push(ScalingRow { size, seconds: start.elapsed().as_secs_f64() });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_predictor_stays_under_a_millisecond() {
        let mut sink = 0u64;
        let report = bench_latency(4, 100, |i| {
            sink = sink.wrapping_add(i as u64);
        })
        .unwrap();
        assert!(report.p50_ms < 1.0, "harness overhead p50 {} ms", report.p50_ms);
        assert!(report.p95_ms >= report.p50_ms);
        assert!(!report.hardware.is_empty());
        assert!(sink < u64::MAX);
    }

    #[test]
    fn too_few_repetitions_is_a_config_error() {
        assert!(matches!(
            bench_latency(1, 10, |_| {}),
            Err(MetricsError::Config(_))
        ));
    }

    #[test]
    fn percentile_is_nearest_rank() {
        let sorted = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        assert_eq!(percentile(&sorted, 0.50), 5.0);
        assert_eq!(percentile(&sorted, 0.95), 10.0);
        assert_eq!(percentile(&sorted, 0.01), 1.0);
    }

    #[test]
    fn scaling_returns_one_row_per_size() {
        let rows = bench_scaling(&[10, 20, 40], |size| {
            // Stand-in workload proportional to the size.
            let mut acc = 0.0f64;
            for i in 0..size * 1000 {
                acc += (i as f64).sqrt();
            }
            assert!(acc >= 0.0);
        })
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].size, 10);
        // Loose monotonicity: measured time should not collapse by more
        // than half when the workload doubles.
        for pair in rows.windows(2) {
            assert!(pair[1].seconds >= 0.5 * pair[0].seconds);
        }
    }

    #[test]
    fn single_size_is_a_single_row() {
        let rows = bench_scaling(&[5], |_| {}).unwrap();
        assert_eq!(rows.len(), 1);
    }

    #[test]
    fn unsorted_sizes_are_rejected() {
        assert!(matches!(
            bench_scaling(&[10, 5], |_| {}),
            Err(MetricsError::Config(_))
        ));
    }
}
