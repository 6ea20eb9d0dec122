//! Small quasi-Newton (BFGS) minimizer with central-difference gradients.
//!
//! Dimension here is at most p + q + 1 <= 11, so dense inverse-Hessian
//! updates on plain vectors are plenty.

pub(crate) struct OptimSettings {
    pub max_iter: usize,
    pub grad_step: f64,
    /// Relative objective improvement below which we declare convergence.
    pub tol: f64,
}

pub(crate) struct Optimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn minimize<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], s: &OptimSettings) -> Optimum {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if n == 0 {
        return Optimum { x, value: fx, iterations: 0, converged: true };
    }

    let mut inv_h = identity(n);
    let mut grad = numeric_gradient(&f, &x, s.grad_step);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..s.max_iter {
        iterations = iter + 1;

        let mut dir = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                dir[i] -= inv_h[i][j] * grad[j];
            }
        }
        let mut slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if slope >= 0.0 {
            // Curvature estimate went bad; restart from steepest descent.
            inv_h = identity(n);
            dir = grad.iter().map(|g| -g).collect();
            slope = -grad.iter().map(|g| g * g).sum::<f64>();
        }
        if slope == 0.0 {
            converged = true;
            break;
        }

        // Backtracking line search with the Armijo condition.
        let mut step = 1.0;
        let mut x_next = x.clone();
        let mut f_next = fx;
        let mut improved = false;
        while step >= 1e-20 {
            for i in 0..n {
                x_next[i] = x[i] + step * dir[i];
            }
            f_next = f(&x_next);
            if f_next.is_finite() && f_next <= fx + 1e-4 * step * slope {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            // No representable step improves the objective: at a minimum
            // to machine precision.
            converged = true;
            break;
        }

        let grad_next = numeric_gradient(&f, &x_next, s.grad_step);

        // BFGS inverse-Hessian update, skipped when curvature is too flat.
        let dx: Vec<f64> = x_next.iter().zip(&x).map(|(a, b)| a - b).collect();
        let dg: Vec<f64> = grad_next.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let dx_dg: f64 = dx.iter().zip(&dg).map(|(a, b)| a * b).sum();
        if dx_dg > 1e-12 {
            let mut h_dg = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    h_dg[i] += inv_h[i][j] * dg[j];
                }
            }
            let dg_h_dg: f64 = dg.iter().zip(&h_dg).map(|(a, b)| a * b).sum();
            let scale = (dx_dg + dg_h_dg) / (dx_dg * dx_dg);
            for i in 0..n {
                for j in 0..n {
                    inv_h[i][j] += scale * dx[i] * dx[j]
                        - (h_dg[i] * dx[j] + dx[i] * h_dg[j]) / dx_dg;
                }
            }
        }

        let rel_improvement = (fx - f_next) / fx.abs().max(1.0);
        x = x_next;
        grad = grad_next;
        fx = f_next;
        if rel_improvement < s.tol {
            converged = true;
            break;
        }
    }

    Optimum { x, value: fx, iterations, converged }
}

pub(crate) fn numeric_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], step: f64) -> Vec<f64> {
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let plus = f(&probe);
        probe[i] = x[i] - step;
        let minus = f(&probe);
        probe[i] = x[i];
        grad[i] = (plus - minus) / (2.0 * step);
    }
    grad
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}
