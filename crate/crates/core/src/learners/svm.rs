//! RBF-kernel C-SVM trained with an SMO dual solver using second-order
//! working-set selection.

use serde::{Deserialize, Serialize};

use crate::features::Label;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svm {
    pub gamma: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` for each support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// `1 / (d * mean per-feature variance)`, falling back to 1 for degenerate
/// data.
pub fn auto_gamma(x: &[Vec<f64>]) -> f64 {
    let n = x.len() as f64;
    let d = x.first().map_or(0, Vec::len);
    if d == 0 || x.is_empty() {
        return 1.0;
    }
    let mut total_var = 0.0;
    for j in 0..d {
        let mean = x.iter().map(|r| r[j]).sum::<f64>() / n;
        total_var += x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
    }
    let mean_var = total_var / d as f64;
    if mean_var > 0.0 {
        1.0 / (d as f64 * mean_var)
    } else {
        1.0
    }
}

/// Outcome of the dual solve, kept for diagnostics and tests.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves `min 1/2 a'Qa - e'a` s.t. `0 <= a <= c`, `y'a = 0` where
/// `Q_ij = y_i y_j K_ij`.
pub fn solve_dual(kernel: &[Vec<f64>], y: &[f64], c: f64, tol: f64, max_iter: usize) -> DualSolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[i][j];
    let is_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let is_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // i: maximal violating index from the "up" set
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if is_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                if !is_low(alpha[t], y[t]) {
                    continue;
                }
                let v = -y[t] * grad[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if b > 0.0 {
                    let mut a = kernel[i][i] + kernel[t][t] - 2.0 * kernel[i][t];
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let obj = -(b * b) / a;
                    if obj < best_obj {
                        best_obj = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            converged = true;
            break;
        };
        if gmax - gmin < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
    }

    // rho from free vectors, else the midpoint of the feasible interval
    let mut free_sum = 0.0;
    let mut free_n = 0usize;
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += yg;
            free_n += 1;
        } else if (alpha[t] >= c && y[t] < 0.0) || (alpha[t] <= 0.0 && y[t] > 0.0) {
            ub = ub.min(yg);
        } else {
            lb = lb.max(yg);
        }
    }
    let rho = if free_n > 0 {
        free_sum / free_n as f64
    } else {
        0.5 * (ub + lb)
    };
    DualSolution {
        alpha,
        rho,
        iterations,
        converged,
    }
}

impl Svm {
    pub fn fit(x: &[Vec<f64>], labels: &[Label], c: f64, gamma: Option<f64>, tol: f64, max_iter: usize) -> Self {
        let gamma = gamma.unwrap_or_else(|| auto_gamma(x));
        let y: Vec<f64> = labels.iter().map(|l| if *l == Label::Gen { 1.0 } else { -1.0 }).collect();
        let n = x.len();
        let mut kernel = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let k = rbf(&x[i], &x[j], gamma);
                kernel[i][j] = k;
                kernel[j][i] = k;
            }
        }
        let sol = solve_dual(&kernel, &y, c, tol, max_iter);
        let mut support_vectors = Vec::new();
        let mut coef = Vec::new();
        for i in 0..n {
            if sol.alpha[i] > 0.0 {
                support_vectors.push(x[i].clone());
                coef.push(sol.alpha[i] * y[i]);
            }
        }
        Self {
            gamma,
            support_vectors,
            coef,
            rho: sol.rho,
        }
    }

    /// Decision value; positive means genuine.
    pub fn score(&self, row: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coef)
            .map(|(sv, c)| c * rbf(sv, row, self.gamma))
            .sum::<f64>()
            - self.rho
    }
}
