//! Seeded ARMA process simulation, the test oracle for estimation.

use super::{arima, TsError};
use crate::rng;

const BURN_IN: usize = 500;

/// Simulate n draws of a stationary ARMA process with the given AR and MA
/// coefficients, mean, and innovation standard deviation. A 500-sample
/// burn-in is generated and discarded so the zero-initialized recursion
/// state washes out. Deterministic given the seed.
pub fn simulate_arma(
    phi: &[f64],
    theta: &[f64],
    mean: f64,
    sigma: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>, TsError> {
    if !arima::ar_is_stationary(phi) {
        return Err(TsError::Stability(format!("AR coefficients {phi:?} are not stationary")));
    }
    let negated: Vec<f64> = theta.iter().map(|t| -t).collect();
    if !arima::ar_is_stationary(&negated) {
        return Err(TsError::Stability(format!("MA coefficients {theta:?} are not invertible")));
    }
    if n == 0 {
        return Err(TsError::Length("cannot simulate zero samples".into()));
    }
    if sigma < 0.0 || !sigma.is_finite() {
        return Err(TsError::Config(format!("sigma must be finite and >= 0, got {sigma}")));
    }

    let mut generator = rng::seeded(seed);
    let total = BURN_IN + n;
    let mut centered = Vec::with_capacity(total);
    let mut noise = Vec::with_capacity(total);
    for t in 0..total {
        let eps = sigma * rng::next_gaussian(&mut generator);
        let mut value = eps;
        for (i, &p) in phi.iter().enumerate() {
            if t > i {
                value += p * centered[t - 1 - i];
            }
        }
        for (j, &q) in theta.iter().enumerate() {
            if t > j {
                value += q * noise[t - 1 - j];
            }
        }
        centered.push(value);
        noise.push(eps);
    }
    Ok(centered[BURN_IN..].iter().map(|v| v + mean).collect())
}
