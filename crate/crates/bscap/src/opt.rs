//! Limited-memory BFGS ascent with backtracking line search.
//!
//! Both capacity solvers optimize smooth reparameterized objectives (logit
//! radii, softmax probabilities), so an unconstrained quasi-Newton method
//! with analytic gradients is all that is needed.

pub(crate) struct LbfgsOptions {
    pub max_iters: usize,
    /// Stop when the gradient infinity norm falls below this.
    pub grad_tol: f64,
    /// Stop when the objective improves by less than this...
    pub f_tol: f64,
    /// ...and the parameter step is smaller than this.
    pub step_tol: f64,
    pub memory: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            max_iters: 500,
            grad_tol: 1e-8,
            f_tol: 1e-9,
            step_tol: 1e-8,
            memory: 10,
        }
    }
}

pub(crate) struct LbfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    #[allow(dead_code)]
    pub iters: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, &v| m.max(v.abs()))
}

/// Maximize `f`; the closure evaluates the objective at `x` and writes its
/// gradient into the second argument.
pub(crate) fn maximize<F>(mut f: F, x0: &[f64], opts: &LbfgsOptions) -> LbfgsResult
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut fx = f(&x, &mut grad);
    if n == 0 {
        return LbfgsResult {
            x,
            f: fx,
            iters: 0,
            converged: true,
        };
    }

    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iters = 0;
    // Small-step/small-improvement stopping needs two consecutive clean
    // iterations; a single heavily-backtracked step is not evidence of
    // stationarity.
    let mut small_streak = 0usize;

    for it in 0..opts.max_iters {
        iters = it + 1;
        if inf_norm(&grad) < opts.grad_tol {
            converged = true;
            break;
        }

        // Ascent direction from the two-loop recursion (run directly on the
        // ascent gradient; the stored pairs carry the matching sign).
        let two_loop = |grad: &[f64],
                        s_hist: &[Vec<f64>],
                        y_hist: &[Vec<f64>],
                        rho_hist: &[f64]|
         -> Vec<f64> {
            let mut d = grad.to_vec();
            let k = s_hist.len();
            let mut alpha = vec![0.0; k];
            for i in (0..k).rev() {
                alpha[i] = rho_hist[i] * dot(&s_hist[i], &d);
                for j in 0..n {
                    d[j] -= alpha[i] * y_hist[i][j];
                }
            }
            if k > 0 {
                let gamma =
                    dot(&s_hist[k - 1], &y_hist[k - 1]) / dot(&y_hist[k - 1], &y_hist[k - 1]);
                for v in d.iter_mut() {
                    *v *= gamma.abs().max(1e-12);
                }
            }
            for i in 0..k {
                let beta = rho_hist[i] * dot(&y_hist[i], &d);
                for j in 0..n {
                    d[j] += s_hist[i][j] * (alpha[i] - beta);
                }
            }
            d
        };

        // With no curvature history the raw gradient is arbitrarily scaled;
        // a unit-length first probe keeps the initial (s, y) pair far above
        // the quadrature noise floor whatever the gradient magnitude.
        let steepest = |grad: &[f64]| -> Vec<f64> {
            let scale = inf_norm(grad).max(1e-300);
            grad.iter().map(|&g| g / scale).collect()
        };

        let mut d = if s_hist.is_empty() {
            steepest(&grad)
        } else {
            two_loop(&grad, &s_hist, &y_hist, &rho_hist)
        };
        let mut slope = dot(&grad, &d);
        if slope <= 0.0 || !slope.is_finite() {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            d = steepest(&grad);
            slope = dot(&grad, &d);
        }

        // Backtracking Armijo line search; on failure, fall back to steepest
        // ascent once before giving up.
        let mut x_new = vec![0.0; n];
        let mut grad_new = vec![0.0; n];
        let mut accepted = false;
        let mut heavy_backtrack = false;
        'search: for attempt in 0..2 {
            let _ = it;
            let mut t = 1.0;
            for bt in 0..60 {
                for j in 0..n {
                    x_new[j] = x[j] + t * d[j];
                }
                let f_new = f(&x_new, &mut grad_new);
                if f_new.is_finite() && f_new >= fx + 1e-4 * t * slope {
                    let df = f_new - fx;
                    let step: Vec<f64> = (0..n).map(|j| x_new[j] - x[j]).collect();
                    let ygrad: Vec<f64> = (0..n).map(|j| grad[j] - grad_new[j]).collect();
                    let sy = dot(&step, &ygrad);
                    if sy > 1e-12 * inf_norm(&step) * inf_norm(&ygrad).max(1e-300) {
                        s_hist.push(step.clone());
                        y_hist.push(ygrad);
                        rho_hist.push(1.0 / sy);
                        if s_hist.len() > opts.memory {
                            s_hist.remove(0);
                            y_hist.remove(0);
                            rho_hist.remove(0);
                        }
                    }
                    let step_norm = inf_norm(&step);
                    x.copy_from_slice(&x_new);
                    grad.copy_from_slice(&grad_new);
                    fx = f_new;
                    accepted = true;
                    heavy_backtrack = bt > 25;
                    if df < opts.f_tol && step_norm < opts.step_tol && bt <= 3 {
                        small_streak += 1;
                        if small_streak >= 2 {
                            converged = true;
                        }
                    } else {
                        small_streak = 0;
                    }
                    break 'search;
                }
                t *= 0.5;
            }
            if attempt == 0 && !s_hist.is_empty() {
                // The quasi-Newton direction is unusable; drop the history
                // and retry along the (normalized) gradient.
                s_hist.clear();
                y_hist.clear();
                rho_hist.clear();
                d = steepest(&grad);
                slope = dot(&grad, &d);
            } else {
                break;
            }
        }
        if !accepted {
            // No ascent step exists along the gradient either: numerically
            // stationary.
            converged = true;
            break;
        }
        if heavy_backtrack {
            // Direction quality was poor; start rebuilding curvature.
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }
        if converged {
            break;
        }
    }

    LbfgsResult {
        x,
        f: fx,
        iters,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        // maximize −(x−1)² − 10(y+2)²
        let r = maximize(
            |x, g| {
                g[0] = -2.0 * (x[0] - 1.0);
                g[1] = -20.0 * (x[1] + 2.0);
                -(x[0] - 1.0).powi(2) - 10.0 * (x[1] + 2.0).powi(2)
            },
            &[5.0, 5.0],
            &LbfgsOptions::default(),
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-7);
        assert!((r.x[1] + 2.0).abs() < 1e-7);
    }

    #[test]
    fn rosenbrock_flipped() {
        // maximize −Rosenbrock; optimum at (1, 1).
        let r = maximize(
            |x, g| {
                let (a, b) = (x[0], x[1]);
                g[0] = -(-2.0 * (1.0 - a) - 400.0 * a * (b - a * a));
                g[1] = -(200.0 * (b - a * a));
                -((1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2))
            },
            &[-1.2, 1.0],
            &LbfgsOptions {
                max_iters: 500,
                ..Default::default()
            },
        );
        assert!(r.converged, "stopped after {} iters at {:?}", r.iters, r.x);
        assert!((r.x[0] - 1.0).abs() < 1e-6);
        assert!((r.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_dimensional_objective() {
        let r = maximize(|_, _| 3.5, &[], &LbfgsOptions::default());
        assert!(r.converged);
        assert_eq!(r.f, 3.5);
    }
}
