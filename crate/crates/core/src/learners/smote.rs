//! Synthetic minority oversampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub const DEFAULT_K_NEIGHBORS: usize = 5;

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices of the `k` nearest other rows of `rows[i]`, ties broken by index.
pub(crate) fn nearest_neighbors(rows: &[Vec<f64>], i: usize, k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(j, r)| (squared_distance(&rows[i], r), j))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.truncate(k);
    d.into_iter().map(|(_, j)| j).collect()
}

/// Grows `minority` to `target_count` rows. Originals come first, verbatim;
/// each synthetic row is `x + u * (nn - x)` for a random base row `x`, one of
/// its `k_neighbors` nearest minority neighbours `nn`, and `u ~ U[0, 1)`.
pub fn smote(minority: &[Vec<f64>], target_count: usize, k_neighbors: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if minority.len() < 2 {
        return Err(Error::invalid(format!(
            "SMOTE needs at least 2 minority rows, got {}",
            minority.len()
        )));
    }
    if k_neighbors == 0 {
        return Err(Error::invalid("SMOTE needs k_neighbors >= 1"));
    }
    if target_count < minority.len() {
        return Err(Error::invalid(format!(
            "target count {target_count} is below the {} existing rows",
            minority.len()
        )));
    }
    let k = k_neighbors.min(minority.len() - 1);
    let neighbors: Vec<Vec<usize>> = (0..minority.len())
        .map(|i| nearest_neighbors(minority, i, k))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = minority.to_vec();
    while out.len() < target_count {
        let base = rng.random_range(0..minority.len());
        let nn = neighbors[base][rng.random_range(0..k)];
        let gap: f64 = rng.random();
        let x = &minority[base];
        let y = &minority[nn];
        out.push(x.iter().zip(y).map(|(a, b)| a + gap * (b - a)).collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()).collect()
    }

    #[test]
    fn grows_to_target_and_keeps_originals() {
        let m = rows(22, 30, 1);
        let out = smote(&m, 270, 5, 9).unwrap();
        assert_eq!(out.len(), 270);
        assert_eq!(&out[..22], &m[..]);
    }

    #[test]
    fn identity_when_already_at_target() {
        let m = rows(7, 3, 2);
        assert_eq!(smote(&m, 7, 5, 0).unwrap(), m);
    }

    #[test]
    fn deterministic_under_seed() {
        let m = rows(10, 4, 3);
        assert_eq!(smote(&m, 50, 5, 42).unwrap(), smote(&m, 50, 5, 42).unwrap());
        assert_ne!(smote(&m, 50, 5, 42).unwrap(), smote(&m, 50, 5, 43).unwrap());
    }

    #[test]
    fn synthetic_rows_stay_in_bounding_box() {
        let m = rows(15, 6, 4);
        let out = smote(&m, 1015, 5, 7).unwrap();
        for j in 0..6 {
            let lo = m.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
            let hi = m.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
            for r in &out[15..] {
                assert!(r[j] >= lo && r[j] <= hi);
            }
        }
    }

    #[test]
    fn synthetic_rows_lie_on_neighbor_segments() {
        let m = rows(8, 3, 5);
        let out = smote(&m, 40, 2, 1).unwrap();
        for r in &out[8..] {
            let on_segment = (0..8).any(|i| {
                nearest_neighbors(&m, i, 2).into_iter().any(|j| {
                    let (x, y) = (&m[i], &m[j]);
                    let u = (r[0] - x[0]) / (y[0] - x[0]);
                    (0.0..=1.0).contains(&u)
                        && (0..3).all(|c| (x[c] + u * (y[c] - x[c]) - r[c]).abs() < 1e-9)
                })
            });
            assert!(on_segment);
        }
    }

    #[test]
    fn errors() {
        assert!(smote(&rows(1, 2, 0), 5, 5, 0).is_err());
        assert!(smote(&rows(4, 2, 0), 3, 5, 0).is_err());
        assert!(smote(&rows(4, 2, 0), 8, 0, 0).is_err());
    }
}
