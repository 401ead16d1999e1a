use serde::{Deserialize, Serialize};

use crate::features::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    pub weights: Vec<f64>,
    pub bias: f64,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Logistic {
    /// Full-batch gradient descent on mean log-loss plus `l2/2 * |w|^2`.
    /// The step is `1/L` for the loss's Lipschitz bound on standardized data.
    pub fn fit(x: &[Vec<f64>], y: &[Label], l2: f64, max_iter: usize) -> Self {
        let n = x.len() as f64;
        let d = x.first().map_or(0, Vec::len);
        let trace: f64 = x.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>()).sum::<f64>() / n;
        let step = 1.0 / (0.25 * (trace + 1.0) + l2);
        let target: Vec<f64> = y.iter().map(|l| if *l == Label::Gen { 1.0 } else { 0.0 }).collect();
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        for _ in 0..max_iter {
            let mut gw: Vec<f64> = w.iter().map(|wj| l2 * wj).collect();
            let mut gb = 0.0;
            for (row, t) in x.iter().zip(&target) {
                let z = row.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>() + b;
                let err = (sigmoid(z) - t) / n;
                for (g, v) in gw.iter_mut().zip(row) {
                    *g += err * v;
                }
                gb += err;
            }
            let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
            if norm < 1e-8 {
                break;
            }
            for (wj, g) in w.iter_mut().zip(&gw) {
                *wj -= step * g;
            }
            b -= step * gb;
        }
        Self { weights: w, bias: b }
    }

    /// Log-odds of the genuine class.
    pub fn score(&self, row: &[f64]) -> f64 {
        row.iter().zip(&self.weights).map(|(a, c)| a * c).sum::<f64>() + self.bias
    }
}
