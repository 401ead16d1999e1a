use gaitdict::features::Label;
use gaitdict::learners::{predict, train, ClassifierKind, ClassifierSpec, ModelParams};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Two Gaussian blobs centred at (-2, -2) and (2, 2), unit variance.
fn blobs(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Label>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let (c, l) = if i % 2 == 0 { (2.0, Label::Gen) } else { (-2.0, Label::Imp) };
        x.push(vec![c + noise.sample(&mut rng), c + noise.sample(&mut rng)]);
        y.push(l);
    }
    (x, y)
}

fn accuracy(pred: &[Label], truth: &[Label]) -> f64 {
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

#[test]
fn every_kind_separates_blobs() {
    let (x, y) = blobs(200, 1);
    let (xt, yt) = blobs(400, 2);
    for kind in ClassifierKind::ALL {
        let model = train(&ClassifierSpec::new(kind, 7), &x, &y).unwrap();
        let acc = accuracy(&predict(&model, &xt).unwrap(), &yt);
        assert!(acc >= 0.95, "{kind}: holdout accuracy {acc}");
    }
}

#[test]
fn same_seed_same_predictions() {
    let (x, y) = blobs(120, 3);
    let (probe, _) = blobs(50, 4);
    for kind in ClassifierKind::ALL {
        let a = train(&ClassifierSpec::new(kind, 11), &x, &y).unwrap();
        let b = train(&ClassifierSpec::new(kind, 11), &x, &y).unwrap();
        assert_eq!(a, b, "{kind}");
        assert_eq!(a.scores(&probe).unwrap(), b.scores(&probe).unwrap());
    }
}

#[test]
fn row_order_does_not_matter() {
    let (x, y) = blobs(90, 5);
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(6));
    let xp: Vec<Vec<f64>> = idx.iter().map(|&i| x[i].clone()).collect();
    let yp: Vec<Label> = idx.iter().map(|&i| y[i]).collect();
    let (probe, _) = blobs(40, 8);
    for kind in ClassifierKind::ALL {
        let a = train(&ClassifierSpec::new(kind, 3), &x, &y).unwrap();
        let b = train(&ClassifierSpec::new(kind, 3), &xp, &yp).unwrap();
        assert_eq!(a.scores(&probe).unwrap(), b.scores(&probe).unwrap(), "{kind}");
    }
}

#[test]
fn conflicting_duplicates_cap_accuracy() {
    let (mut x, mut y) = blobs(60, 9);
    let dup: Vec<(Vec<f64>, Label)> = x.iter().cloned().zip(y.iter().map(|l| l.other())).collect();
    for (r, l) in dup {
        x.push(r);
        y.push(l);
    }
    for kind in ClassifierKind::ALL {
        let m = train(&ClassifierSpec::new(kind, 1), &x, &y).unwrap();
        let acc = accuracy(&predict(&m, &x).unwrap(), &y);
        assert!(acc <= 0.5 + 1e-12, "{kind}: {acc}");
    }
}

#[test]
fn one_nearest_neighbor_memorizes_training_set() {
    let (x, y) = blobs(100, 12);
    let m = train(&ClassifierSpec::new(ClassifierKind::Knn, 0).with("k", 1.0), &x, &y).unwrap();
    assert_eq!(predict(&m, &x).unwrap(), y);
}

#[test]
fn forest_prediction_is_majority_of_trees() {
    let (x, y) = blobs(80, 13);
    let model = train(&ClassifierSpec::new(ClassifierKind::RandomForest, 4).with("trees", 25.0), &x, &y).unwrap();
    let ModelParams::RandomForest(forest) = &model.params else {
        panic!("expected a forest");
    };
    assert_eq!(forest.trees.len(), 25);
    let (probe, _) = blobs(60, 14);
    let pred = predict(&model, &probe).unwrap();
    for (row, p) in probe.iter().zip(pred) {
        let z = model.scaler.transform(row);
        let gen_votes = forest.trees.iter().filter(|t| t.predict(&z) == Label::Gen).count();
        let expected = if 2 * gen_votes > forest.trees.len() { Label::Gen } else { Label::Imp };
        assert_eq!(p, expected);
    }
}

#[test]
fn models_survive_json() {
    let (x, y) = blobs(40, 15);
    let (probe, _) = blobs(20, 16);
    for kind in ClassifierKind::ALL {
        let m = train(&ClassifierSpec::new(kind, 2), &x, &y).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: gaitdict::learners::TrainedModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back.scores(&probe).unwrap(), m.scores(&probe).unwrap(), "{kind}");
    }
}
