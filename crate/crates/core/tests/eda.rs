use gaitdict::dictattack::Factor;
use gaitdict::eda::{overlap_grid, pearson, pearson_p_value};
use gaitdict::signal::{Axis, ChannelId, Sensor};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// r from raw sums: (n Sxy - Sx Sy) / sqrt((n Sxx - Sx^2)(n Syy - Sy^2)).
fn oracle_r(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt()
}

#[test]
fn pearson_matches_sum_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let n = rng.random_range(3..40);
        let slope = rng.random_range(-2.0..2.0);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| slope * v + rng.random_range(-1.0..1.0)).collect();
        let r = pearson(&x, &y).unwrap();
        assert!((r - oracle_r(&x, &y)).abs() < 1e-9);
        assert!(r.abs() <= 1.0 + 1e-12);
        let p = pearson_p_value(r, n).unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
}

#[test]
fn p_value_reference_points() {
    // t = 0.5 * sqrt(8) / sqrt(0.75) = 1.633 on 8 df; two-sided p = 0.1411
    assert!((pearson_p_value(0.5, 10).unwrap() - 0.1411).abs() < 5e-4);
    assert_eq!(pearson_p_value(0.0, 10).unwrap(), 1.0);
}

#[test]
fn overlap_is_invariant_to_window_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut levels: Vec<(String, Vec<Vec<f64>>)> = (0..3)
        .map(|l| {
            let windows = (0..4)
                .map(|_| (0..50).map(|_| l as f64 * 0.5 + rng.random_range(-1.0..1.0)).collect())
                .collect();
            (format!("lvl{l}"), windows)
        })
        .collect();
    let ch = ChannelId::new(Sensor::La, Axis::X);
    let a = overlap_grid(Factor::StepWidth, ch, 8.0, 20, &levels).unwrap();
    for (_, w) in levels.iter_mut() {
        w.shuffle(&mut rng);
    }
    let b = overlap_grid(Factor::StepWidth, ch, 8.0, 20, &levels).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let (x, y) = (a.values.get(i, j).unwrap(), b.values.get(i, j).unwrap());
            assert!((x - y).abs() < 1e-12);
            assert!((0.0..=1.0 + 1e-12).contains(&x));
        }
    }
    let (same, cross) = a.diagonal_means().unwrap();
    assert!(same > cross);
    assert_eq!(a.pair_counts[0][0], 6);
    assert_eq!(a.pair_counts[0][1], 16);
}
