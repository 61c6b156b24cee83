//! Quasi-Newton minimization with finite-difference gradients.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsConfig {
    pub max_iter: usize,
    /// Stop once the gradient ∞-norm drops below this.
    pub grad_tol: f64,
    /// Central-difference step per coordinate.
    pub fd_step: f64,
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    /// Line search gives up below this step length.
    pub min_step: f64,
    /// Largest ∞-norm of a trial step.
    pub max_step: f64,
}

impl Default for BfgsConfig {
    fn default() -> Self {
        Self { max_iter: 200, grad_tol: 1e-6, fd_step: 1e-5, c1: 1e-4, min_step: 1e-12, max_step: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    pub line_search_failed: bool,
    pub evaluations: usize,
}

pub fn central_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Minimizes `f` from `x0`. Non-finite values count as rejected trial
/// points. The returned point is the best one visited.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], config: &BfgsConfig) -> BfgsOutcome {
    let n = x0.len();
    let mut evaluations = 0usize;
    let eval = |x: &DVector<f64>, count: &mut usize| {
        *count += 1;
        f(x.as_slice())
    };
    let grad = |x: &DVector<f64>, count: &mut usize| {
        *count += 2 * n;
        let g = central_gradient(&f, x.as_slice(), config.fd_step);
        DVector::from_vec(g)
    };

    let mut x = DVector::from_column_slice(x0);
    let mut fx = eval(&x, &mut evaluations);
    let mut g = grad(&x, &mut evaluations);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut scaled = false;
    let mut iterations = 0;
    let mut line_search_failed = false;

    while iterations < config.max_iter {
        if inf_norm(&g) < config.grad_tol || !g.iter().all(|v| v.is_finite()) {
            break;
        }
        let mut d = -(&h * &g);
        let mut slope = g.dot(&d);
        if !(slope < 0.0) {
            h = DMatrix::identity(n, n);
            d = -g.clone();
            slope = g.dot(&d);
        }
        let norm = inf_norm(&d);
        if norm > config.max_step {
            d *= config.max_step / norm;
            slope = g.dot(&d);
        }

        let mut alpha = 1.0;
        let accepted = loop {
            let trial = &x + &d * alpha;
            let ft = eval(&trial, &mut evaluations);
            if ft.is_finite() && ft <= fx + config.c1 * alpha * slope {
                break Some((trial, ft));
            }
            alpha *= 0.5;
            if alpha < config.min_step {
                break None;
            }
        };
        let Some((x_new, f_new)) = accepted else {
            line_search_failed = true;
            break;
        };

        let g_new = grad(&x_new, &mut evaluations);
        let s = &x_new - &x;
        let y = &g_new - &g;
        let ys = y.dot(&s);
        if ys > 1e-10 * s.norm() * y.norm() {
            if !scaled {
                h = DMatrix::identity(n, n) * (ys / y.dot(&y));
                scaled = true;
            }
            let rho = 1.0 / ys;
            let eye = DMatrix::<f64>::identity(n, n);
            let left = &eye - &s * y.transpose() * rho;
            let right = &eye - &y * s.transpose() * rho;
            h = &left * &h * &right + &s * s.transpose() * rho;
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        iterations += 1;
    }

    let gradient_norm = inf_norm(&g);
    BfgsOutcome {
        x: x.as_slice().to_vec(),
        f: fx,
        iterations,
        converged: gradient_norm < config.grad_tol,
        gradient_norm,
        line_search_failed,
        evaluations,
    }
}
