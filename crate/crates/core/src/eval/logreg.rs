//! L2-regularized multinomial logistic regression fitted with L-BFGS.
//!
//! Minimizes `C · Σ_i CE(x_i, y_i) + ½‖W‖²` (intercepts unpenalized).

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::num;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegConfig {
    /// Inverse regularization strength.
    pub c: f64,
    pub max_iter: usize,
    /// Stop once the gradient's max-norm drops below this.
    pub tol: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig { c: 1.0, max_iter: 100, tol: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression {
    n_classes: usize,
    dim: usize,
    // n_classes rows of dim weights followed by one intercept
    params: Vec<f64>,
    pub iterations: usize,
}

impl LogisticRegression {
    /// Fits on rows `x` with class indices `y` in `0..n_classes`.
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, cfg: &LogRegConfig) -> Self {
        let dim = x.first().map_or(0, Vec::len);
        let problem = Problem { x, y, n_classes, dim, c: cfg.c };
        let (params, iterations) = lbfgs(&problem, vec![0.0; n_classes * (dim + 1)], cfg.max_iter, cfg.tol);
        LogisticRegression { n_classes, dim, params, iterations }
    }

    pub fn decision(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_classes)
            .map(|k| {
                let row = &self.params[k * (self.dim + 1)..(k + 1) * (self.dim + 1)];
                row[..self.dim].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + row[self.dim]
            })
            .collect()
    }

    /// Highest-scoring class; ties go to the lower index.
    pub fn predict(&self, x: &[f64]) -> usize {
        let z = self.decision(x);
        let mut best = 0;
        for k in 1..z.len() {
            if z[k] > z[best] {
                best = k;
            }
        }
        best
    }
}

struct Problem<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    dim: usize,
    c: f64,
}

impl Problem<'_> {
    fn evaluate(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let width = self.dim + 1;
        let mut grad = vec![0.0; params.len()];
        let mut loss = 0.0;
        let mut z = vec![0.0; self.n_classes];
        for (xi, &yi) in self.x.iter().zip(self.y) {
            for (k, zk) in z.iter_mut().enumerate() {
                let row = &params[k * width..(k + 1) * width];
                *zk = row[..self.dim].iter().zip(xi).map(|(w, v)| w * v).sum::<f64>() + row[self.dim];
            }
            let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = z.iter().map(|v| num::exp(v - max)).sum();
            let log_norm = max + num::ln(sum);
            loss += log_norm - z[yi];
            for k in 0..self.n_classes {
                let p = num::exp(z[k] - log_norm);
                let coef = self.c * (p - if k == yi { 1.0 } else { 0.0 });
                let g = &mut grad[k * width..(k + 1) * width];
                for (gj, xj) in g[..self.dim].iter_mut().zip(xi) {
                    *gj += coef * xj;
                }
                g[self.dim] += coef;
            }
        }
        let mut f = self.c * loss;
        for k in 0..self.n_classes {
            for j in 0..self.dim {
                let w = params[k * width + j];
                f += 0.5 * w * w;
                grad[k * width + j] += w;
            }
        }
        (f, grad)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lbfgs(problem: &Problem<'_>, mut x: Vec<f64>, max_iter: usize, tol: f64) -> (Vec<f64>, usize) {
    const MEMORY: usize = 10;
    let (mut f, mut g) = problem.evaluate(&x);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(MEMORY);
    let mut iter = 0;
    while iter < max_iter {
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= tol {
            break;
        }
        iter += 1;

        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = history.back().map_or_else(
            || 1.0 / num::sqrt(dot(&g, &g)).max(1.0),
            |(s, y, _)| dot(s, y) / dot(y, y),
        );
        for di in d.iter_mut() {
            *di *= gamma;
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            history.clear();
            d = g.iter().map(|v| -v / num::sqrt(dot(&g, &g)).max(1.0)).collect();
            slope = dot(&g, &d);
        }

        // Armijo backtracking
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let candidate: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            let (fc, gc) = problem.evaluate(&candidate);
            if fc.is_finite() && fc <= f + 1e-4 * step * slope {
                accepted = Some((candidate, fc, gc));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else { break };
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if history.len() == MEMORY {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let converged = (f - f_new).abs() <= 1e-12 * f.abs().max(1.0);
        x = x_new;
        f = f_new;
        g = g_new;
        if converged {
            break;
        }
    }
    (x, iter)
}
