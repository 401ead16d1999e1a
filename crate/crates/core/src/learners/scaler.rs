use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Per-feature z-score standardization. Constant training columns map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    /// Zero marks a constant column.
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::invalid("cannot fit a scaler on zero rows"))?;
        let d = first.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        let mut std = vec![0.0; d];
        for j in 0..d {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            let mut sum = 0.0;
            for r in rows {
                sum += r[j];
                lo = lo.min(r[j]);
                hi = hi.max(r[j]);
            }
            if lo == hi {
                mean[j] = lo;
                continue;
            }
            let m = sum / n;
            let var = rows.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<f64>() / n;
            mean[j] = m;
            std[j] = var.sqrt();
        }
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn standardized_columns_have_zero_mean_unit_std(
            rows in proptest::collection::vec(proptest::collection::vec(-1e3f64..1e3, 3), 2..60),
            c in -5.0f64..5.0,
        ) {
            let mut rows = rows;
            for r in rows.iter_mut() {
                r.push(c);
            }
            let s = Scaler::fit(&rows).unwrap();
            let z = s.transform_all(&rows);
            let n = z.len() as f64;
            for j in 0..4 {
                let mean = z.iter().map(|r| r[j]).sum::<f64>() / n;
                let std = (z.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n).sqrt();
                prop_assert!(mean.abs() < 1e-9);
                if s.std[j] > 0.0 {
                    prop_assert!((std - 1.0).abs() < 1e-9);
                } else {
                    prop_assert!(z.iter().all(|r| r[j] == 0.0));
                }
            }
            prop_assert_eq!(s.std[3], 0.0);
        }
    }
}
