//! Frequency-domain features from the one-sided DFT amplitude spectrum.

use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::time::quantile_sorted;
use crate::{Error, Result};

pub const N_FREQ_FEATURES: usize = 4;
pub const FREQ_FEATURE_NAMES: [&str; N_FREQ_FEATURES] = ["fft_q1", "fft_q2", "fft_q3", "fft_std"];

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `|X_k|` for `k = 1..=n/2`: no taper, no normalization, DC excluded.
pub fn amplitude_spectrum(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n));
    fft.process(&mut buf);
    buf[1..=n / 2].iter().map(|c| c.norm()).collect()
}

/// First, second and third quantile and standard deviation of the amplitude
/// spectrum.
pub fn extract_freq_features(x: &[f64]) -> Result<[f64; N_FREQ_FEATURES]> {
    if x.len() < 4 {
        return Err(Error::invalid(format!(
            "frequency features need at least 4 samples, got {}",
            x.len()
        )));
    }
    let mut amp = amplitude_spectrum(x);
    let n = amp.len() as f64;
    let mean = amp.iter().sum::<f64>() / n;
    let std = (amp.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n).sqrt();
    amp.sort_by(f64::total_cmp);
    Ok([
        quantile_sorted(&amp, 0.25),
        quantile_sorted(&amp, 0.5),
        quantile_sorted(&amp, 0.75),
        std,
    ])
}
