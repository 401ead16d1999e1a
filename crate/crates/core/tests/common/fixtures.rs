//! Small seeded feature stores with a full four-sensor schema.

use gaitdict::authbench::FeatureStore;
use gaitdict::features::{feature_names, FeatureMatrix, Provenance};
use gaitdict::signal::Sensor;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// One matrix of `rows` Gaussian rows; every column of user `u` is shifted
/// by `shift * u`.
pub fn user_matrix(user: usize, rows: usize, shift: f64, session: &str, seed: u64) -> FeatureMatrix {
    let names = feature_names(&Sensor::ALL);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut m = FeatureMatrix::new(names.clone());
    for w in 0..rows {
        let row: Vec<f64> = (0..names.len())
            .map(|c| shift * user as f64 * (1.0 + (c % 7) as f64 * 0.1) + noise.sample(&mut rng))
            .collect();
        m.push_row(
            row,
            None,
            Provenance {
                subject: user_id(user),
                session: session.to_string(),
                window: w,
            },
        )
        .unwrap();
    }
    m
}

pub fn user_id(u: usize) -> String {
    format!("u{u:02}")
}

pub fn store(users: usize, rows: usize, shift: f64, session: &str, seed: u64) -> FeatureStore {
    let mut s = FeatureStore::default();
    for u in 0..users {
        s.insert(&user_id(u), user_matrix(u, rows, shift, session, seed.wrapping_mul(1000) + u as u64));
    }
    s
}
