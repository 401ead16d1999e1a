//! Equal-width histograms and the normalized intersection overlap score.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
}

impl Histogram {
    /// Bins `samples` into `bins` equal-width bins spanning `[lo, hi]`.
    /// Samples outside the span are not counted; `hi` itself falls in the
    /// last bin.
    pub fn with_range(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::invalid("histogram needs at least one bin"));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::invalid(format!("invalid histogram range [{lo}, {hi}]")));
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins)
            .map(|i| if i == bins { hi } else { lo + i as f64 * width })
            .collect();
        let mut counts = vec![0u64; bins];
        for &v in samples {
            if v < lo || v > hi || !v.is_finite() {
                continue;
            }
            let b = (((v - lo) / (hi - lo) * bins as f64).floor() as usize).min(bins - 1);
            counts[b] += 1;
        }
        Ok(Self { edges, counts })
    }

    /// Bins over the samples' own range; a constant sample set gets a unit
    /// span centred on its value.
    pub fn new(samples: &[f64], bins: usize) -> Result<Self> {
        let (lo, hi) = range(samples)
            .ok_or_else(|| Error::invalid("histogram of empty sample set"))?;
        if lo == hi {
            Self::with_range(samples, lo - 0.5, hi + 0.5, bins)
        } else {
            Self::with_range(samples, lo, hi, bins)
        }
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn range(samples: &[f64]) -> Option<(f64, f64)> {
    samples.iter().filter(|v| v.is_finite()).fold(None, |acc, &v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// `sum_i min(P_i, Q_i) / sum_i P_i` over a shared bin schema.
pub fn intersection(p: &Histogram, q: &Histogram) -> Result<f64> {
    if p.edges != q.edges {
        return Err(Error::invalid("histograms do not share bin edges"));
    }
    let total = p.total();
    if total == 0 {
        return Err(Error::invalid("reference histogram is empty"));
    }
    let overlap: u64 = p.counts.iter().zip(&q.counts).map(|(a, b)| *a.min(b)).sum();
    Ok(overlap as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn self_overlap_is_one() {
        let p = Histogram::new(&[1.0, 2.0, 2.5, 3.0, 9.0], 80).unwrap();
        assert_eq!(intersection(&p, &p).unwrap(), 1.0);
    }

    #[test]
    fn disjoint_support_is_zero() {
        let p = Histogram::with_range(&[0.1, 0.2, 0.3], 0.0, 2.0, 4).unwrap();
        let q = Histogram::with_range(&[1.6, 1.7, 1.9], 0.0, 2.0, 4).unwrap();
        assert_eq!(intersection(&p, &q).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_schema_is_rejected() {
        let p = Histogram::with_range(&[0.1], 0.0, 1.0, 4).unwrap();
        let q = Histogram::with_range(&[0.1], 0.0, 1.0, 5).unwrap();
        assert!(intersection(&p, &q).is_err());
        let empty = Histogram::with_range(&[5.0], 0.0, 1.0, 4).unwrap();
        assert!(intersection(&empty, &p).is_err());
    }

    #[test]
    fn edges_are_strictly_increasing() {
        let h = Histogram::new(&[4.0, 4.0], 80).unwrap();
        assert_eq!(h.edges().len(), 81);
        assert!(h.edges().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(h.total(), 2);
    }

    proptest! {
        #[test]
        fn overlap_is_bounded(
            a in proptest::collection::vec(-5.0f64..5.0, 1..200),
            b in proptest::collection::vec(-5.0f64..5.0, 1..200),
        ) {
            let p = Histogram::with_range(&a, -5.0, 5.0, 80).unwrap();
            let q = Histogram::with_range(&b, -5.0, 5.0, 80).unwrap();
            let i = intersection(&p, &q).unwrap();
            prop_assert!(i >= 0.0);
            if q.total() <= p.total() {
                prop_assert!(i <= 1.0);
            }
            prop_assert_eq!(intersection(&p, &p).unwrap(), 1.0);
        }
    }
}
