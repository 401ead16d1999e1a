mod common;

use common::fixtures;
use gaitdict::authbench::{
    assemble_training_set, evaluate_zero_effort, sweep, train_user_model, EvalReport, StoredModel, SweepOptions,
    TrainOptions,
};
use gaitdict::features::Label;
use gaitdict::learners::{ClassifierKind, ClassifierSpec};
use gaitdict::signal::SensorCombo;

#[test]
fn constant_acceptor_and_rejector() {
    let accept = EvalReport::from_decisions(&[true; 7], &[true; 30]).unwrap();
    assert_eq!((accept.far, accept.frr, accept.hter), (1.0, 0.0, 0.5));
    let reject = EvalReport::from_decisions(&[false; 7], &[false; 30]).unwrap();
    assert_eq!((reject.far, reject.frr, reject.hter), (0.0, 1.0, 0.5));
    assert!(EvalReport::from_decisions(&[], &[true]).is_err());
}

fn model(kind: ClassifierKind, combo: &str) -> (StoredModel, gaitdict::authbench::FeatureStore) {
    let s1 = fixtures::store(4, 22, 0.4, "1", 1);
    let spec = ClassifierSpec::new(kind, 3);
    let m = train_user_model("u01", combo.parse().unwrap(), &spec, &s1, TrainOptions::default()).unwrap();
    (m, fixtures::store(4, 22, 0.4, "2", 2))
}

#[test]
fn zero_effort_counts_match_naive_loop() {
    for kind in ClassifierKind::ALL {
        let (m, s2) = model(kind, "a+g");
        let report = evaluate_zero_effort(&m, &s2).unwrap();
        let (mut ga, mut gn, mut ia, mut in_) = (0, 0, 0, 0);
        for user in s2.user_ids() {
            let matrix = s2.get(&user).unwrap();
            for row in 0..matrix.len() {
                let single = matrix.project(&(0..matrix.width()).collect::<Vec<_>>());
                let one = gaitdict::features::FeatureMatrix {
                    rows: vec![single.rows[row].clone()],
                    labels: vec![None],
                    provenance: vec![single.provenance[row].clone()],
                    names: single.names.clone(),
                };
                let ok = m.accepts(&one).unwrap()[0];
                match (user == "u01", ok) {
                    (true, true) => ga += 1,
                    (true, false) => gn += 1,
                    (false, true) => ia += 1,
                    (false, false) => in_ += 1,
                }
            }
        }
        assert_eq!(
            (report.genuine_accepted, report.genuine_rejected, report.impostor_accepted, report.impostor_rejected),
            (ga, gn, ia, in_),
            "{kind}"
        );
        assert_eq!(report.frr, gn as f64 / (ga + gn) as f64);
        assert_eq!(report.far, ia as f64 / (ia + in_) as f64);
        assert_eq!(report.hter, (report.far + report.frr) / 2.0);
    }
}

#[test]
fn balanced_set_size() {
    // 22 genuine rows, 54 impostors at 5 rows each
    let store = fixtures::store(55, 22, 0.0, "1", 4);
    let set = assemble_training_set("u00", &store, 5, 8).unwrap();
    assert_eq!(set.len(), 540);
    let gen = set.labels.iter().filter(|l| **l == Some(Label::Gen)).count();
    assert_eq!(gen, 270);
    assert!(set.provenance.iter().filter(|p| p.subject == "u00" || p.session == "smote").count() == 270);
}

#[test]
fn own_rows_never_in_impostor_pool() {
    let store = fixtures::store(6, 22, 1.0, "1", 5);
    let set = assemble_training_set("u03", &store, 5, 1).unwrap();
    for (l, p) in set.labels.iter().zip(&set.provenance) {
        if *l == Some(Label::Imp) {
            assert_ne!(p.subject, "u03");
        }
    }
}

#[test]
fn session_two_does_not_influence_models() {
    let s1 = fixtures::store(3, 22, 0.5, "1", 6);
    let s2a = fixtures::store(3, 22, 0.5, "2", 7);
    let s2b = fixtures::store(3, 22, 3.0, "2", 8);
    let users = s1.user_ids();
    let combos = [SensorCombo::all()[0], SensorCombo::full()];
    let opts = SweepOptions {
        master_seed: 9,
        train: TrainOptions::default(),
    };
    let a = sweep(&users, &combos, &ClassifierKind::ALL, &s1, &s2a, opts);
    let b = sweep(&users, &combos, &ClassifierKind::ALL, &s1, &s2b, opts);
    assert_eq!(a.cells.len(), 30);
    for (x, y) in a.successes().zip(b.successes()) {
        assert_eq!(serde_json::to_string(x.0).unwrap(), serde_json::to_string(y.0).unwrap());
    }
}

#[test]
fn same_seed_same_grid() {
    let s1 = fixtures::store(3, 22, 0.5, "1", 6);
    let s2 = fixtures::store(3, 22, 0.5, "2", 7);
    let users = s1.user_ids();
    let opts = SweepOptions {
        master_seed: 1,
        train: TrainOptions::default(),
    };
    let combos = ["g".parse().unwrap()];
    let a = sweep(&users, &combos, &ClassifierKind::ALL, &s1, &s2, opts);
    let b = sweep(&users, &combos, &ClassifierKind::ALL, &s1, &s2, opts);
    assert_eq!(gaitdict::authbench::cells_csv(&a), gaitdict::authbench::cells_csv(&b));
}

#[test]
fn stored_model_round_trip() {
    let (m, s2) = model(ClassifierKind::Svm, "m+r");
    let dir = tempfile::tempdir().unwrap();
    let path = m.save(dir.path()).unwrap();
    assert_eq!(path.file_name().unwrap().to_str().unwrap(), "u01__m+r__svm.json");
    let back = StoredModel::load(&path).unwrap();
    assert_eq!(back, m);
    let probe = s2.get("u02").unwrap();
    assert_eq!(back.scores(probe).unwrap(), m.scores(probe).unwrap());
}

#[test]
fn missing_target_names_the_subject() {
    let s1 = fixtures::store(3, 22, 0.5, "1", 6);
    let err = train_user_model("u09", SensorCombo::full(), &ClassifierSpec::new(ClassifierKind::Knn, 0), &s1, TrainOptions::default())
        .unwrap_err();
    assert!(err.to_string().contains("u09"), "{err}");
}
