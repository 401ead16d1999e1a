use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::features::Label;

/// One hidden ReLU layer feeding a single logistic output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    /// `hidden x input`
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl Mlp {
    /// Per-sample SGD on binary cross-entropy, reshuffled every epoch.
    pub fn fit(x: &[Vec<f64>], y: &[Label], hidden: usize, step: f64, epochs: usize, seed: u64) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let he = Normal::new(0.0, (2.0 / d.max(1) as f64).sqrt()).expect("valid std");
        let glorot = Normal::new(0.0, (1.0 / hidden as f64).sqrt()).expect("valid std");
        let mut net = Mlp {
            w1: (0..hidden).map(|_| (0..d).map(|_| he.sample(&mut rng)).collect()).collect(),
            b1: vec![0.0; hidden],
            w2: (0..hidden).map(|_| glorot.sample(&mut rng)).collect(),
            b2: 0.0,
        };
        let target: Vec<f64> = y.iter().map(|l| if *l == Label::Gen { 1.0 } else { 0.0 }).collect();
        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut h = vec![0.0; hidden];
        for _ in 0..epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                let row = &x[i];
                net.hidden(row, &mut h);
                let z = h.iter().zip(&net.w2).map(|(a, w)| a * w).sum::<f64>() + net.b2;
                let delta = 1.0 / (1.0 + (-z).exp()) - target[i];
                for k in 0..hidden {
                    if h[k] > 0.0 {
                        let g = delta * net.w2[k];
                        for (w, v) in net.w1[k].iter_mut().zip(row) {
                            *w -= step * g * v;
                        }
                        net.b1[k] -= step * g;
                    }
                    net.w2[k] -= step * delta * h[k];
                }
                net.b2 -= step * delta;
            }
        }
        net
    }

    fn hidden(&self, row: &[f64], out: &mut [f64]) {
        for (k, slot) in out.iter_mut().enumerate() {
            let a = self.w1[k].iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + self.b1[k];
            *slot = a.max(0.0);
        }
    }

    /// Output logit.
    pub fn score(&self, row: &[f64]) -> f64 {
        let mut h = vec![0.0; self.b1.len()];
        self.hidden(row, &mut h);
        h.iter().zip(&self.w2).map(|(a, w)| a * w).sum::<f64>() + self.b2
    }
}
