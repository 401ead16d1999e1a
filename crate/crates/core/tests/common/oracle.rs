//! Straightforward reference implementations of the per-channel window
//! features, written without sharing code with the library.

use std::f64::consts::PI;

pub fn mean(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in x {
        s += v;
    }
    s / x.len() as f64
}

fn central_moment(x: &[f64], m: f64, p: i32) -> f64 {
    x.iter().map(|v| (v - m).powi(p)).sum::<f64>() / x.len() as f64
}

/// Type-7 quantile: `h = (n - 1) q`, interpolate between floor and ceil.
pub fn quantile(x: &[f64], q: f64) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (s.len() - 1) as f64 * q;
    let lo = h.floor();
    let hi = h.ceil();
    s[lo as usize] + (h - lo) * (s[hi as usize] - s[lo as usize])
}

fn longest(flags: impl Iterator<Item = bool>) -> f64 {
    let (mut best, mut run) = (0u32, 0u32);
    for f in flags {
        run = if f { run + 1 } else { 0 };
        best = best.max(run);
    }
    best as f64
}

/// The 30 time-domain features in library order.
pub fn time_features(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let m = if lo == hi { lo } else { mean(x) };
    let var = central_moment(x, m, 2);
    let sd = var.sqrt();
    let (skew, kurt) = if var == 0.0 {
        (0.0, 0.0)
    } else {
        (central_moment(x, m, 3) / (sd * sd * sd), central_moment(x, m, 4) / (var * var) - 3.0)
    };
    let mut mac = 0.0;
    for i in 1..n {
        mac += (x[i] - x[i - 1]).abs();
    }
    mac /= (n - 1) as f64;
    let mad = x.iter().map(|v| (v - m).abs()).sum::<f64>() / n as f64;
    let energy = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let mut crossings = 0.0;
    for i in 1..n {
        let a = x[i - 1] - m >= 0.0;
        let b = x[i] - m >= 0.0;
        if a != b {
            crossings += 1.0;
        }
    }
    let mut peaks = 0.0;
    for i in 1..n.saturating_sub(1) {
        if x[i] > x[i - 1] && x[i] > x[i + 1] {
            peaks += 1.0;
        }
    }
    let mut out = vec![
        m,
        sd,
        mac,
        mad,
        skew,
        kurt,
        energy,
        crossings,
        peaks,
        quantile(x, 0.25),
        quantile(x, 0.5),
        quantile(x, 0.75),
        longest(x.iter().map(|v| *v < m)),
        longest(x.iter().map(|v| *v > m)),
    ];
    let mut bins = [0.0; 16];
    for v in x {
        let b = if hi > lo { ((16.0 * (v - lo) / (hi - lo)).floor() as usize).min(15) } else { 0 };
        bins[b] += 1.0;
    }
    out.extend(bins);
    out
}

/// Magnitudes of the direct DFT at frequencies `1..=n/2`.
pub fn dft_amplitudes(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (1..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in x.iter().enumerate() {
                let a = 2.0 * PI * (k * t % n) as f64 / n as f64;
                re += v * a.cos();
                im -= v * a.sin();
            }
            (re * re + im * im).sqrt()
        })
        .collect()
}

/// Quartiles and population std of the DFT amplitudes.
pub fn freq_features(x: &[f64]) -> Vec<f64> {
    let a = dft_amplitudes(x);
    let m = mean(&a);
    let sd = central_moment(&a, m, 2).sqrt();
    vec![quantile(&a, 0.25), quantile(&a, 0.5), quantile(&a, 0.75), sd]
}

pub fn all_features(x: &[f64]) -> Vec<f64> {
    let mut f = time_features(x);
    f.extend(freq_features(x));
    f
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Seeded test windows: harmonic mixtures plus noise of random length,
/// with occasional constant and quantized windows.
pub fn random_windows(count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.random_range(16..=512);
            match i % 20 {
                0 => vec![rng.random_range(-3.0..3.0); n],
                1 => (0..n).map(|_| rng.random_range(-4i32..=4) as f64 * 0.5).collect(),
                _ => {
                    let offset = rng.random_range(-10.0..10.0);
                    let amp = rng.random_range(0.1..5.0);
                    let f = rng.random_range(0.5..20.0);
                    let noise = rng.random_range(0.0..1.0);
                    (0..n)
                        .map(|t| {
                            let s = t as f64 / n as f64;
                            offset + amp * (2.0 * PI * f * s).sin() + 0.3 * amp * (4.0 * PI * f * s + 1.0).cos()
                                + noise * rng.random_range(-1.0..1.0)
                        })
                        .collect()
                }
            }
        })
        .collect()
}
