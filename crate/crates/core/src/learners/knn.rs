use serde::{Deserialize, Serialize};

use crate::features::Label;

/// Stored training set; votes among the `k` nearest points (ties in
/// distance broken by training order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

impl Knn {
    pub fn fit(x: &[Vec<f64>], y: &[Label], k: usize) -> Self {
        Self {
            k,
            points: x.to_vec(),
            labels: y.to_vec(),
        }
    }

    /// Genuine votes minus impostor votes.
    pub fn score(&self, row: &[f64]) -> f64 {
        let mut d: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        let k = self.k.min(d.len());
        d.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        d[..k]
            .iter()
            .map(|(_, i)| if self.labels[*i] == Label::Gen { 1.0 } else { -1.0 })
            .sum()
    }
}
