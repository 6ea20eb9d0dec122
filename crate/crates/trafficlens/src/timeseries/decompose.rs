//! Classical additive decomposition: centered-moving-average trend,
//! per-phase seasonal means, residual remainder.

use serde::{Deserialize, Serialize};

use super::TsError;

/// observed = trend + seasonal + residual, exactly, wherever the trend is
/// defined. Trend and residual are `None` inside the half-window edges;
/// the seasonal component is exactly periodic and sums to zero over any
/// aligned window of one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub period: usize,
    pub trend: Vec<Option<f64>>,
    pub seasonal: Vec<f64>,
    pub residual: Vec<Option<f64>>,
}

impl Decomposition {
    /// Seasonal value for an arbitrary offset from the start of the series,
    /// including offsets past the observed range.
    pub fn seasonal_at(&self, offset: usize) -> f64 {
        self.seasonal[offset % self.period]
    }
}

pub fn decompose(values: &[f64], period: usize) -> Result<Decomposition, TsError> {
    if period < 2 {
        return Err(TsError::Config(format!("period must be at least 2, got {period}")));
    }
    let n = values.len();
    if n < 2 * period {
        return Err(TsError::Length(format!(
            "need at least {} observations for period {period}, got {n}",
            2 * period
        )));
    }

    // Centered moving average; even periods use the standard 2xP scheme
    // with half weights on the window ends.
    let half = period / 2;
    let mut trend: Vec<Option<f64>> = vec![None; n];
    if period % 2 == 0 {
        for i in half..n - half {
            let mut sum = 0.5 * values[i - half] + 0.5 * values[i + half];
            for j in (i - half + 1)..(i + half) {
                sum += values[j];
            }
            trend[i] = Some(sum / period as f64);
        }
    } else {
        for i in half..n - half {
            let sum: f64 = values[i - half..=i + half].iter().sum();
            trend[i] = Some(sum / period as f64);
        }
    }

    // Per-phase means of the detrended series, re-centered to sum to zero
    // over one period.
    let mut phase_sum = vec![0.0; period];
    let mut phase_count = vec![0usize; period];
    for i in 0..n {
        if let Some(t) = trend[i] {
            phase_sum[i % period] += values[i] - t;
            phase_count[i % period] += 1;
        }
    }
    let mut profile: Vec<f64> = phase_sum
        .iter()
        .zip(&phase_count)
        .map(|(s, c)| if *c > 0 { s / *c as f64 } else { 0.0 })
        .collect();
    let offset = profile.iter().sum::<f64>() / period as f64;
    for value in &mut profile {
        *value -= offset;
    }

    let seasonal: Vec<f64> = (0..n).map(|i| profile[i % period]).collect();
    let residual: Vec<Option<f64>> = (0..n)
        .map(|i| trend[i].map(|t| values[i] - t - seasonal[i]))
        .collect();

    Ok(Decomposition { period, trend, seasonal, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_decomposes_to_itself() {
        let values = vec![5.0; 40];
        for period in [3, 4, 7] {
            let dec = decompose(&values, period).unwrap();
            for i in 0..values.len() {
                if let Some(t) = dec.trend[i] {
                    assert!((t - 5.0).abs() < 1e-12);
                    assert!(dec.seasonal[i].abs() < 1e-12);
                    assert!(dec.residual[i].unwrap().abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn recovers_a_sine_seasonal_over_a_linear_trend() {
        let n = 480;
        let period = 24;
        let values: Vec<f64> = (0..n)
            .map(|t| 0.5 * t as f64 + 10.0 * (std::f64::consts::TAU * t as f64 / 24.0).sin())
            .collect();
        let dec = decompose(&values, period).unwrap();

        // The generator is the oracle: correlation of the extracted seasonal
        // with the true sine must be near-perfect.
        let truth: Vec<f64> =
            (0..n).map(|t| 10.0 * (std::f64::consts::TAU * t as f64 / 24.0).sin()).collect();
        let corr = correlation(&dec.seasonal, &truth);
        assert!(corr > 0.999, "seasonal correlation {corr}");

        // Least squares slope over the defined trend points recovers 0.5.
        let pts: Vec<(f64, f64)> = dec
            .trend
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.map(|t| (i as f64, t)))
            .collect();
        let slope = ls_slope(&pts);
        assert!((slope - 0.5).abs() < 0.02, "trend slope {slope}");
    }

    #[test]
    fn additivity_holds_exactly_where_trend_is_defined() {
        let values: Vec<f64> = (0..100)
            .map(|t| 3.0 + 0.2 * t as f64 + ((t * 31 + 7) % 17) as f64 * 0.6)
            .collect();
        let dec = decompose(&values, 12).unwrap();
        for i in 0..values.len() {
            if let (Some(t), Some(r)) = (dec.trend[i], dec.residual[i]) {
                assert!((values[i] - (t + dec.seasonal[i] + r)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn seasonal_sums_to_zero_over_any_aligned_window() {
        let values: Vec<f64> =
            (0..96).map(|t| 10.0 + (std::f64::consts::TAU * t as f64 / 8.0).cos() * 4.0).collect();
        let dec = decompose(&values, 8).unwrap();
        for start in 0..(96 - 8) {
            let sum: f64 = dec.seasonal[start..start + 8].iter().sum();
            assert!(sum.abs() < 1e-9, "window at {start} sums to {sum}");
        }
    }

    #[test]
    fn short_series_is_a_length_error() {
        assert!(matches!(decompose(&[1.0; 10], 6), Err(TsError::Length(_))));
        assert!(matches!(decompose(&[1.0; 10], 1), Err(TsError::Config(_))));
    }

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va.sqrt() * vb.sqrt())
    }

    fn ls_slope(points: &[(f64, f64)]) -> f64 {
        let n = points.len() as f64;
        let mx = points.iter().map(|(x, _)| x).sum::<f64>() / n;
        let my = points.iter().map(|(_, y)| y).sum::<f64>() / n;
        let num: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        num / den
    }
}
