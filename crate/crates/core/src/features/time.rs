//! Time-domain window statistics.

use crate::{Error, Result};

pub const N_BINS: usize = 16;
pub const N_TIME_FEATURES: usize = 14 + N_BINS;

pub const TIME_FEATURE_NAMES: [&str; 14] = [
    "mean",
    "std",
    "mac",
    "mad",
    "skew",
    "kurt",
    "energy",
    "mean_crossings",
    "peaks",
    "q1",
    "q2",
    "q3",
    "strike_below",
    "strike_above",
];

/// Quantile of sorted data with linear interpolation between order
/// statistics (position `q * (n - 1)`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn longest_run(x: &[f64], pred: impl Fn(f64) -> bool) -> usize {
    let mut best = 0;
    let mut cur = 0;
    for &v in x {
        if pred(v) {
            cur += 1;
            best = best.max(cur);
        } else {
            cur = 0;
        }
    }
    best
}

/// Counts of samples in 16 equal-width bins over the window's own range.
/// A constant window puts every sample in the first bin.
pub fn bin_counts(x: &[f64], min: f64, max: f64) -> [f64; N_BINS] {
    let mut counts = [0.0; N_BINS];
    let width = max - min;
    for &v in x {
        let b = if width > 0.0 {
            (((v - min) / width * N_BINS as f64).floor() as usize).min(N_BINS - 1)
        } else {
            0
        };
        counts[b] += 1.0;
    }
    counts
}

/// The 30 time-domain features of one channel window, in the fixed order of
/// [`TIME_FEATURE_NAMES`] followed by the 16 bin counts.
pub fn extract_time_features(x: &[f64]) -> Result<[f64; N_TIME_FEATURES]> {
    let n = x.len();
    if n < 2 {
        return Err(Error::invalid(format!(
            "time features need at least 2 samples, got {n}"
        )));
    }
    let nf = n as f64;
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[n - 1]);
    let constant = min == max;

    let mean = if constant { min } else { x.iter().sum::<f64>() / nf };
    let (mut m2, mut m3, mut m4, mut mad) = (0.0, 0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        mad += d.abs();
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    mad /= nf;
    let (std, skew, kurt) = if constant || m2 == 0.0 {
        (0.0, 0.0, 0.0)
    } else {
        (m2.sqrt(), m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    };
    let mac = x.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (nf - 1.0);
    let energy = x.iter().map(|v| v * v).sum::<f64>() / nf;
    // exact zeros of (x - mean) count as positive
    let crossings = x
        .windows(2)
        .filter(|w| (w[0] - mean >= 0.0) != (w[1] - mean >= 0.0))
        .count();
    let peaks = x
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] > w[2])
        .count();

    let mut out = [0.0; N_TIME_FEATURES];
    out[..14].copy_from_slice(&[
        mean,
        std,
        mac,
        mad,
        skew,
        kurt,
        energy,
        crossings as f64,
        peaks as f64,
        quantile_sorted(&sorted, 0.25),
        quantile_sorted(&sorted, 0.5),
        quantile_sorted(&sorted, 0.75),
        longest_run(x, |v| v < mean) as f64,
        longest_run(x, |v| v > mean) as f64,
    ]);
    out[14..].copy_from_slice(&bin_counts(x, min, max));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_window_conventions() {
        let f = extract_time_features(&[0.1; 50]).unwrap();
        assert_eq!(f[0], 0.1);
        for i in [1, 2, 3, 4, 5, 7, 8, 12, 13] {
            assert_eq!(f[i], 0.0, "feature {}", TIME_FEATURE_NAMES[i]);
        }
        assert!((f[6] - 0.1 * 0.1).abs() < 1e-15);
        assert_eq!(f[9], 0.1);
        assert_eq!(f[14], 50.0);
        assert_eq!(f[15..].iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn ramp_window() {
        let x: Vec<f64> = (1..=8).map(f64::from).collect();
        let f = extract_time_features(&x).unwrap();
        assert_eq!(f[0], 4.5);
        assert_eq!(f[10], 4.5);
        assert_eq!(f[9], 2.75);
        assert_eq!(f[11], 6.25);
        assert_eq!(f[2], 1.0);
        assert_eq!(f[7], 1.0);
        assert_eq!(f[8], 0.0);
        assert_eq!(f[12], 4.0);
        assert_eq!(f[13], 4.0);
        assert_eq!(f[14..].iter().sum::<f64>(), 8.0);
        // symmetric data has zero skew
        assert!(f[4].abs() < 1e-15);
    }

    #[test]
    fn too_short_window_is_rejected() {
        assert!(extract_time_features(&[1.0]).is_err());
        assert!(extract_time_features(&[]).is_err());
    }

    proptest! {
        #[test]
        fn bins_sum_to_window_length(x in proptest::collection::vec(-50.0f64..50.0, 2..300)) {
            let f = extract_time_features(&x).unwrap();
            prop_assert_eq!(f[14..].iter().sum::<f64>(), x.len() as f64);
        }

        #[test]
        fn translation_covariance(x in proptest::collection::vec(-5.0f64..5.0, 8..200), c in -100.0f64..100.0) {
            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            let a = extract_time_features(&x).unwrap();
            let b = extract_time_features(&shifted).unwrap();
            let close = |u: f64, v: f64, tol: f64| (u - v).abs() <= tol * (1.0 + u.abs().max(v.abs()));
            for i in [0usize, 9, 10, 11] {
                prop_assert!(close(a[i] + c, b[i], 1e-9), "feature {} {} {}", i, a[i] + c, b[i]);
            }
            for i in [1usize, 2, 3] {
                prop_assert!(close(a[i], b[i], 1e-9));
            }
            // higher moments lose relative precision after a large shift
            prop_assert!(close(a[4], b[4], 1e-6));
            prop_assert!(close(a[5], b[5], 1e-6));
            // counts can only move when a sample sits within rounding of the mean
            let near_mean = x.iter().any(|v| (v - a[0]).abs() < 1e-9);
            if !near_mean {
                for i in [7usize, 8, 12, 13] {
                    prop_assert_eq!(a[i], b[i]);
                }
            }
        }
    }
}
