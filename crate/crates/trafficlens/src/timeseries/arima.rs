//! Conditional-sum-of-squares ARIMA estimation and forecasting.

use serde::{Deserialize, Serialize};

use super::optim::{minimize, OptimSettings};
use super::{difference_with_initials, ArimaModel, ArimaOrder, Forecast, TsError};

/// Optimizer settings for [`fit_arima`]. The defaults are fixed so a fit is
/// reproducible from the data and order alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSettings {
    pub max_iter: usize,
    pub grad_step: f64,
    pub tol: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self { max_iter: 500, grad_step: 1e-6, tol: 1e-10 }
    }
}

/// Map partial autocorrelations in (-1, 1) to AR coefficients of a
/// stationary polynomial via the Durbin-Levinson recursion.
fn pacf_to_ar(pacf: &[f64]) -> Vec<f64> {
    let mut coeffs = vec![0.0; pacf.len()];
    for (j, &k) in pacf.iter().enumerate() {
        let prev = coeffs[..j].to_vec();
        for i in 0..j {
            coeffs[i] = prev[i] - k * prev[j - 1 - i];
        }
        coeffs[j] = k;
    }
    coeffs
}

/// Inverse of [`pacf_to_ar`]; `None` when the polynomial is not stationary.
fn ar_to_pacf(coeffs: &[f64]) -> Option<Vec<f64>> {
    let mut work = coeffs.to_vec();
    let mut pacf = vec![0.0; coeffs.len()];
    for j in (0..coeffs.len()).rev() {
        let k = work[j];
        if !(k.abs() < 1.0) {
            return None;
        }
        pacf[j] = k;
        let denom = 1.0 - k * k;
        let prev = work[..j].to_vec();
        for i in 0..j {
            work[i] = (prev[i] + k * prev[j - 1 - i]) / denom;
        }
    }
    Some(pacf)
}

pub(super) fn ar_is_stationary(coeffs: &[f64]) -> bool {
    ar_to_pacf(coeffs).is_some()
}

fn unconstrained_to_ar(raw: &[f64]) -> Vec<f64> {
    let pacf: Vec<f64> = raw.iter().map(|u| u.tanh()).collect();
    pacf_to_ar(&pacf)
}

/// One-step residual recursion with zeroed pre-sample residuals; the
/// recursion starts at index max(p, q). Returns the residual sequence, the
/// conditional sum of squares, and the number of effective observations.
pub(super) fn css_residuals(
    w: &[f64],
    mean: f64,
    phi: &[f64],
    theta: &[f64],
) -> (Vec<f64>, f64, usize) {
    let n = w.len();
    let start = phi.len().max(theta.len());
    let mut eps = vec![0.0; n];
    let mut css = 0.0;
    for t in start..n {
        let mut pred = mean;
        for (i, &p) in phi.iter().enumerate() {
            pred += p * (w[t - 1 - i] - mean);
        }
        for (j, &q) in theta.iter().enumerate() {
            pred += q * eps[t - 1 - j];
        }
        eps[t] = w[t] - pred;
        css += eps[t] * eps[t];
    }
    (eps, css, n - start)
}

/// Conditional sum of squares for the given coefficients on an already
/// differenced series. Exposed so a coarse-grid cross-check can probe the
/// same objective the optimizer minimizes.
pub fn conditional_sum_of_squares(w: &[f64], mean: f64, phi: &[f64], theta: &[f64]) -> f64 {
    css_residuals(w, mean, phi, theta).1
}

/// Fit an ARIMA(p,d,q) model by minimizing the conditional sum of squares
/// of one-step residuals. The series is differenced `d` times internally;
/// stationarity and invertibility are enforced by optimizing partial
/// autocorrelations through a tanh map. Deterministic: the optimizer always
/// starts from zero coefficients and the sample mean.
pub fn fit_arima(
    series: &[f64],
    order: ArimaOrder,
    settings: &FitSettings,
) -> Result<ArimaModel, TsError> {
    let ArimaOrder { p, d, q } = order;
    let min_len = 10 * (p + q + 1);
    if series.len() < min_len {
        return Err(TsError::Length(format!(
            "need at least {min_len} observations to fit order ({p},{d},{q}), got {}",
            series.len()
        )));
    }
    let (w, _) = difference_with_initials(series, d)?;
    let sample_mean = w.iter().sum::<f64>() / w.len() as f64;
    let sample_var = w.iter().map(|v| (v - sample_mean).powi(2)).sum::<f64>() / w.len() as f64;
    if sample_var == 0.0 && p + q > 0 {
        return Err(TsError::DegenerateData(
            "series is constant after differencing; AR/MA terms are unidentifiable".into(),
        ));
    }

    // Parameter vector: [p unconstrained AR params, q unconstrained MA
    // params, mean]. Normalizing the objective by the effective length
    // keeps the line search well scaled; the argmin is unchanged.
    let n_eff = (w.len() - p.max(q)) as f64;
    let objective = |x: &[f64]| {
        let phi = unconstrained_to_ar(&x[..p]);
        let ma_ar = unconstrained_to_ar(&x[p..p + q]);
        let theta: Vec<f64> = ma_ar.iter().map(|a| -a).collect();
        conditional_sum_of_squares(&w, x[p + q], &phi, &theta) / n_eff
    };

    let mut start = vec![0.0; p + q + 1];
    start[p + q] = sample_mean;
    let opt_settings =
        OptimSettings { max_iter: settings.max_iter, grad_step: settings.grad_step, tol: settings.tol };
    let outcome = minimize(objective, &start, &opt_settings);

    let phi = unconstrained_to_ar(&outcome.x[..p]);
    let theta: Vec<f64> = unconstrained_to_ar(&outcome.x[p..p + q]).iter().map(|a| -a).collect();
    let mean = outcome.x[p + q];
    let (residuals, css, n_used) = css_residuals(&w, mean, &phi, &theta);
    debug_assert!((outcome.value - css / n_eff).abs() <= 1e-9 * css.max(1.0));
    let model = ArimaModel {
        order,
        phi,
        theta,
        mean,
        sigma2: css / n_used as f64,
        css,
        residuals,
    };
    if !outcome.converged {
        return Err(TsError::NonConvergence {
            iterations: outcome.iterations,
            css,
            best: Box::new(model),
        });
    }
    Ok(model)
}

/// Psi weights of the ARMA part: coefficients of the infinite moving-average
/// representation, truncated at 1000 terms.
pub fn psi_weights(phi: &[f64], theta: &[f64], count: usize) -> Vec<f64> {
    const CAP: usize = 1000;
    let mut psi = vec![0.0; count];
    if count == 0 {
        return psi;
    }
    psi[0] = 1.0;
    for k in 1..count.min(CAP) {
        let mut value = if k <= theta.len() { theta[k - 1] } else { 0.0 };
        for (i, &p) in phi.iter().enumerate().take(k) {
            value += p * psi[k - 1 - i];
        }
        psi[k] = value;
    }
    psi
}

/// Forecast `horizon` steps past the end of `last_observations` (trailing
/// values of the original, undifferenced series; at least max(p,q) + d of
/// them). MA terms use the trailing in-sample residuals stored in the
/// model, so the observations should be the tail of the series the model
/// was fitted on. Future innovations are set to zero; standard errors come
/// from the psi-weight expansion.
pub fn forecast(
    model: &ArimaModel,
    last_observations: &[f64],
    horizon: usize,
) -> Result<Forecast, TsError> {
    if horizon < 1 {
        return Err(TsError::Config(format!("horizon must be at least 1, got {horizon}")));
    }
    let ArimaOrder { p, d, q } = model.order;
    let needed = p.max(q) + d;
    if last_observations.len() < needed.max(d + 1) {
        return Err(TsError::Length(format!(
            "need at least {} trailing observations for order ({p},{d},{q}), got {}",
            needed.max(d + 1),
            last_observations.len()
        )));
    }

    let (w, _) = difference_with_initials(last_observations, d)?;

    // History buffers aligned at the end: values of the differenced series
    // and their residuals, extended step by step with forecasts.
    let mut values: Vec<f64> = w.clone();
    let mut eps = vec![0.0; w.len()];
    let tail = model.residuals.len().min(q).min(eps.len());
    for i in 0..tail {
        eps[w.len() - 1 - i] = model.residuals[model.residuals.len() - 1 - i];
    }

    let mut diff_forecasts = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let t = values.len();
        let mut pred = model.mean;
        for (i, &coef) in model.phi.iter().enumerate() {
            pred += coef * (values[t - 1 - i] - model.mean);
        }
        for (j, &coef) in model.theta.iter().enumerate() {
            pred += coef * eps[t - 1 - j];
        }
        values.push(pred);
        eps.push(0.0);
        diff_forecasts.push(pred);
    }

    // Integrate back to the original scale: each differencing level
    // contributes a running sum anchored at its last observed value.
    let mut point = diff_forecasts;
    for level in (0..d).rev() {
        let (leveled, _) = difference_with_initials(last_observations, level)?;
        let mut running = *leveled.last().unwrap();
        for value in &mut point {
            running += *value;
            *value = running;
        }
    }

    // var(h) = sigma2 * sum_{k<h} psi_k^2 on the integrated scale: the psi
    // weights of the differenced process are cumulatively summed once per
    // differencing pass.
    let mut psi = psi_weights(&model.phi, &model.theta, horizon);
    for _ in 0..d {
        for k in 1..psi.len() {
            psi[k] += psi[k - 1];
        }
    }
    let mut cumulative = 0.0;
    let stderr: Vec<f64> = psi
        .iter()
        .map(|w| {
            cumulative += w * w;
            (model.sigma2 * cumulative).sqrt()
        })
        .collect();

    Ok(Forecast { horizon, point, stderr })
}
