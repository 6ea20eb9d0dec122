//! ARIMA(p,d,q) estimation, forecasting, differencing, classical additive
//! decomposition, and forecast-error scoring for hourly traffic volumes.

mod arima;
mod decompose;
mod optim;
mod simulate;

pub use arima::{fit_arima, forecast, psi_weights, FitSettings};
pub use decompose::{decompose, Decomposition};
pub use simulate::simulate_arma;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TsError {
    #[error("length error: {0}")]
    Length(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("unstable coefficients: {0}")]
    Stability(String),
    #[error("no convergence after {iterations} iterations (best CSS {css})")]
    NonConvergence {
        iterations: usize,
        css: f64,
        /// Best model found before the iteration cap.
        best: Box<ArimaModel>,
    },
}

/// Model order: p autoregressive lags, d differencing passes, q moving
/// average lags. Guard rails keep the desk-scale optimizer well-posed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Result<Self, TsError> {
        if p > 5 || q > 5 || d > 2 {
            return Err(TsError::Config(format!(
                "order ({p},{d},{q}) outside guard rails p<=5, d<=2, q<=5"
            )));
        }
        Ok(Self { p, d, q })
    }
}

/// A fitted ARIMA model. `phi`/`theta` are the AR and MA coefficients,
/// `mean` the constant level of the differenced series, `sigma2` the
/// innovation variance, `css` the final conditional sum of squares and
/// `residuals` the in-sample one-step errors (zero before the recursion
/// start index max(p,q)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaModel {
    pub order: ArimaOrder,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub mean: f64,
    pub sigma2: f64,
    pub css: f64,
    pub residuals: Vec<f64>,
}

impl ArimaModel {
    /// Whether the AR polynomial 1 - sum phi_i z^i has all roots strictly
    /// outside the unit circle.
    pub fn is_stationary(&self) -> bool {
        arima::ar_is_stationary(&self.phi)
    }

    /// Whether the MA polynomial 1 + sum theta_j z^j has all roots strictly
    /// outside the unit circle.
    pub fn is_invertible(&self) -> bool {
        let negated: Vec<f64> = self.theta.iter().map(|t| -t).collect();
        arima::ar_is_stationary(&negated)
    }
}

/// H-step-ahead point forecasts with one-sided standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub horizon: usize,
    pub point: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Apply d rounds of first differencing. Output length is `x.len() - d`.
pub fn difference(x: &[f64], d: usize) -> Result<Vec<f64>, TsError> {
    Ok(difference_with_initials(x, d)?.0)
}

/// Difference and keep the initial values needed to invert: `initials[k]`
/// is the first element of the k-times differenced series.
pub fn difference_with_initials(x: &[f64], d: usize) -> Result<(Vec<f64>, Vec<f64>), TsError> {
    if d >= x.len() {
        return Err(TsError::Length(format!(
            "cannot difference {} points {d} times",
            x.len()
        )));
    }
    let mut current = x.to_vec();
    let mut initials = Vec::with_capacity(d);
    for _ in 0..d {
        initials.push(current[0]);
        current = current.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok((current, initials))
}

/// Invert [`difference_with_initials`] exactly via repeated cumulative sums.
pub fn undifference(w: &[f64], initials: &[f64]) -> Vec<f64> {
    let mut current = w.to_vec();
    for &first in initials.iter().rev() {
        let mut rebuilt = Vec::with_capacity(current.len() + 1);
        rebuilt.push(first);
        for &step in &current {
            rebuilt.push(rebuilt[rebuilt.len() - 1] + step);
        }
        current = rebuilt;
    }
    current
}

/// Mean absolute error between two equal-length sequences.
pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64, TsError> {
    if actual.is_empty() || actual.len() != predicted.len() {
        return Err(TsError::Shape(format!(
            "mae needs equal non-empty lengths, got {} and {}",
            actual.len(),
            predicted.len()
        )));
    }
    let total: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).abs()).sum();
    Ok(total / actual.len() as f64)
}
