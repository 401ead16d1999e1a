//! Mutual-information feature ranking.

use super::Label;
use crate::{Error, Result};

/// Number of equal-frequency bins used to discretize a feature.
pub const MI_BINS: usize = 10;

/// Assigns each value an equal-frequency bin from its rank. Tied values
/// share the bin of the first tied position, so the assignment depends only
/// on the ordering of values.
pub fn equal_frequency_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut out = vec![0; n];
    let mut group_bin = 0;
    for (pos, &idx) in order.iter().enumerate() {
        if pos == 0 || values[idx] != values[order[pos - 1]] {
            group_bin = pos * bins / n;
        }
        out[idx] = group_bin;
    }
    out
}

/// Plug-in mutual information (nats) between a discretized feature and the
/// binary label.
pub fn mutual_information(column: &[f64], labels: &[Label]) -> Result<f64> {
    if column.len() != labels.len() {
        return Err(Error::invalid(format!(
            "column has {} values but {} labels",
            column.len(),
            labels.len()
        )));
    }
    let n_gen = labels.iter().filter(|l| **l == Label::Gen).count();
    if n_gen == 0 || n_gen == labels.len() {
        return Err(Error::invalid("mutual information needs both classes"));
    }
    let bins = equal_frequency_bins(column, MI_BINS);
    let mut joint = [[0usize; 2]; MI_BINS];
    for (b, l) in bins.iter().zip(labels) {
        joint[*b][l.index()] += 1;
    }
    let n = column.len() as f64;
    let py = [n_gen as f64 / n, (labels.len() - n_gen) as f64 / n];
    let mut mi = 0.0;
    for row in &joint {
        let px = (row[0] + row[1]) as f64 / n;
        for (y, &c) in row.iter().enumerate() {
            if c > 0 {
                let pxy = c as f64 / n;
                mi += pxy * (pxy / (px * py[y])).ln();
            }
        }
    }
    Ok(mi.max(0.0))
}

/// Ranks columns `candidates` of `rows` by mutual information with the
/// labels and returns the top `k` (descending MI, ties by ascending index).
pub fn select_top_k(
    rows: &[Vec<f64>],
    labels: &[Label],
    candidates: &[usize],
    k: usize,
) -> Result<Vec<usize>> {
    if k > candidates.len() {
        return Err(Error::invalid(format!(
            "cannot select {k} of {} features",
            candidates.len()
        )));
    }
    let mut scored = candidates
        .iter()
        .map(|&c| {
            let column: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            Ok((c, mutual_information(&column, labels)?))
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(scored.into_iter().take(k).map(|(c, _)| c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn labels(bits: &[u8]) -> Vec<Label> {
        bits.iter()
            .map(|&b| if b == 1 { Label::Gen } else { Label::Imp })
            .collect()
    }

    fn entropy(p: f64) -> f64 {
        -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
    }

    #[test]
    fn perfect_dependence_gives_label_entropy() {
        let bits = [1, 0, 1, 1, 0, 0, 1, 0, 0, 1, 1, 0];
        let col: Vec<f64> = bits.iter().map(|&b| b as f64).collect();
        let mi = mutual_information(&col, &labels(&bits)).unwrap();
        assert!((mi - entropy(0.5)).abs() < 1e-12);
    }

    #[test]
    fn two_bin_joint_table() {
        // value 0: 3 gen 1 imp; value 1: 2 gen 4 imp
        let col = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let lab = labels(&[1, 1, 1, 0, 1, 1, 0, 0, 0, 0]);
        let cells: [(f64, f64, f64); 4] = [(0.3, 0.4, 0.5), (0.1, 0.4, 0.5), (0.2, 0.6, 0.5), (0.4, 0.6, 0.5)];
        let expected: f64 = cells.iter().map(|(pxy, px, py)| pxy * (pxy / (px * py)).ln()).sum();
        let mi = mutual_information(&col, &lab).unwrap();
        assert!((mi - expected).abs() < 1e-12, "{mi} vs {expected}");
    }

    #[test]
    fn independent_feature_is_near_zero() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 4000;
        let col: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let lab: Vec<Label> = (0..n)
            .map(|_| if rng.random::<bool>() { Label::Gen } else { Label::Imp })
            .collect();
        // plug-in bias is about (bins - 1) / (2n)
        assert!(mutual_information(&col, &lab).unwrap() < 0.01);
    }

    #[test]
    fn single_class_is_rejected() {
        assert!(mutual_information(&[1.0, 2.0], &labels(&[1, 1])).is_err());
        assert!(mutual_information(&[1.0], &labels(&[1, 0])).is_err());
    }

    #[test]
    fn selection_examples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let lab: Vec<Label> = (0..200)
            .map(|i| if i % 2 == 0 { Label::Gen } else { Label::Imp })
            .collect();
        let rows: Vec<Vec<f64>> = lab
            .iter()
            .map(|l| {
                let mut r: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
                r[4] = if *l == Label::Gen { 1.0 } else { 0.0 };
                r
            })
            .collect();
        let all: Vec<usize> = (0..6).collect();
        let top = select_top_k(&rows, &lab, &all, 6).unwrap();
        assert_eq!(top[0], 4);
        let mut sorted = top.clone();
        sorted.sort();
        assert_eq!(sorted, all);
        assert!(select_top_k(&rows, &lab, &all, 7).is_err());
    }

    proptest! {
        #[test]
        fn invariant_under_monotone_transform_and_relabeling(
            data in proptest::collection::vec((-10.0f64..10.0, any::<bool>()), 10..120)
        ) {
            let col: Vec<f64> = data.iter().map(|d| d.0).collect();
            let lab: Vec<Label> = data.iter().map(|d| if d.1 { Label::Gen } else { Label::Imp }).collect();
            prop_assume!(lab.iter().any(|l| *l == Label::Gen) && lab.iter().any(|l| *l == Label::Imp));
            let base = mutual_information(&col, &lab).unwrap();
            prop_assert!(base >= 0.0);
            let warped: Vec<f64> = col.iter().map(|v| (v * 0.3).exp() + 2.0 * v).collect();
            prop_assert_eq!(base, mutual_information(&warped, &lab).unwrap());
            let flipped: Vec<Label> = lab.iter().map(|l| l.other()).collect();
            prop_assert!((base - mutual_information(&col, &flipped).unwrap()).abs() < 1e-12);
        }
    }
}
