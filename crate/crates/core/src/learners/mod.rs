//! SMOTE oversampling and the five classifier families behind one
//! train/predict interface.
//!
//! Every model standardizes its input with a [`Scaler`] fitted on the
//! training rows. Training rows are sorted canonically before fitting, so a
//! model depends only on the multiset of `(row, label)` pairs and the seed.

pub mod forest;
pub mod knn;
pub mod logistic;
pub mod mlp;
pub mod scaler;
pub mod smote;
pub mod svm;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use scaler::Scaler;
pub use smote::{smote, DEFAULT_K_NEIGHBORS};

use crate::features::Label;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Knn,
    Svm,
    Logistic,
    Mlp,
    RandomForest,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::Knn,
        ClassifierKind::Svm,
        ClassifierKind::Logistic,
        ClassifierKind::Mlp,
        ClassifierKind::RandomForest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Svm => "svm",
            ClassifierKind::Logistic => "logistic",
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::RandomForest => "random_forest",
        }
    }

    /// Default hyperparameters and the accepted range of each.
    fn schema(self) -> &'static [(&'static str, f64, f64, f64)] {
        // (name, default, min, max)
        match self {
            ClassifierKind::Knn => &[("k", 5.0, 1.0, 1e6)],
            ClassifierKind::Svm => &[
                ("c", 1.0, 1e-12, 1e12),
                // 0 selects 1 / (d * mean feature variance)
                ("gamma", 0.0, 0.0, 1e12),
                ("tol", 1e-3, 1e-15, 1.0),
                ("max_iter", 1e7, 1.0, 1e9),
            ],
            ClassifierKind::Logistic => &[("l2", 1e-2, 0.0, 1e6), ("max_iter", 500.0, 1.0, 1e7)],
            ClassifierKind::Mlp => &[
                ("hidden", 50.0, 1.0, 1e5),
                ("step", 1e-3, 1e-12, 10.0),
                ("epochs", 500.0, 1.0, 1e6),
            ],
            ClassifierKind::RandomForest => &[
                ("trees", 100.0, 1.0, 1e5),
                // 0 selects floor(sqrt(d))
                ("max_features", 0.0, 0.0, 1e6),
            ],
        }
    }

    fn integral(name: &str) -> bool {
        matches!(name, "k" | "max_iter" | "hidden" | "epochs" | "trees" | "max_features")
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knn" => Ok(ClassifierKind::Knn),
            "svm" => Ok(ClassifierKind::Svm),
            "logistic" | "lreg" => Ok(ClassifierKind::Logistic),
            "mlp" => Ok(ClassifierKind::Mlp),
            "random_forest" | "rf" | "ranfor" => Ok(ClassifierKind::RandomForest),
            other => Err(Error::invalid(format!("unknown classifier kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    /// Overrides of the kind's defaults.
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, f64>,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind, seed: u64) -> Self {
        Self {
            kind,
            hyperparameters: BTreeMap::new(),
            seed,
        }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.hyperparameters.insert(name.to_string(), value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let schema = self.kind.schema();
        for (name, value) in &self.hyperparameters {
            let Some(&(_, _, lo, hi)) = schema.iter().find(|s| s.0 == name) else {
                return Err(Error::invalid(format!(
                    "{} has no hyperparameter `{name}`",
                    self.kind
                )));
            };
            if !(value.is_finite() && *value >= lo && *value <= hi) {
                return Err(Error::invalid(format!(
                    "{}.{name} = {value} outside [{lo}, {hi}]",
                    self.kind
                )));
            }
            if ClassifierKind::integral(name) && value.fract() != 0.0 {
                return Err(Error::invalid(format!("{}.{name} must be an integer", self.kind)));
            }
        }
        Ok(())
    }

    fn get(&self, name: &str) -> f64 {
        self.hyperparameters.get(name).copied().unwrap_or_else(|| {
            self.kind
                .schema()
                .iter()
                .find(|s| s.0 == name)
                .map(|s| s.1)
                .expect("hyperparameter in schema")
        })
    }

    fn get_usize(&self, name: &str) -> usize {
        self.get(name) as usize
    }
}

/// Kind-specific learned parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Knn(knn::Knn),
    Svm(svm::Svm),
    Logistic(logistic::Logistic),
    Mlp(mlp::Mlp),
    RandomForest(forest::Forest),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    pub scaler: Scaler,
    pub params: ModelParams,
}

fn check_rows(x: &[Vec<f64>], what: &str) -> Result<usize> {
    let d = x
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::invalid(format!("{what}: no rows")))?;
    for (i, r) in x.iter().enumerate() {
        if r.len() != d {
            return Err(Error::invalid(format!(
                "{what}: row {i} has {} features, expected {d}",
                r.len()
            )));
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("{what}: row {i} has non-finite values")));
        }
    }
    Ok(d)
}

/// Sorts `(row, label)` pairs by label, then lexicographically by value.
pub fn canonical_order(x: &[Vec<f64>], y: &[Label]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| {
        y[a].cmp(&y[b]).then_with(|| {
            x[a].iter()
                .zip(&x[b])
                .map(|(u, v)| u.total_cmp(v))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    idx
}

/// Fits the scaler, standardizes, and trains the requested classifier.
pub fn train(spec: &ClassifierSpec, x: &[Vec<f64>], y: &[Label]) -> Result<TrainedModel> {
    spec.validate()?;
    check_rows(x, "training set")?;
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "{} rows but {} labels",
            x.len(),
            y.len()
        )));
    }
    if !(y.contains(&Label::Gen) && y.contains(&Label::Imp)) {
        return Err(Error::invalid("training set needs both classes"));
    }
    let order = canonical_order(x, y);
    let x: Vec<Vec<f64>> = order.iter().map(|&i| x[i].clone()).collect();
    let y: Vec<Label> = order.iter().map(|&i| y[i]).collect();

    let scaler = Scaler::fit(&x)?;
    let z = scaler.transform_all(&x);
    let params = match spec.kind {
        ClassifierKind::Knn => ModelParams::Knn(knn::Knn::fit(&z, &y, spec.get_usize("k"))),
        ClassifierKind::Svm => {
            let gamma = spec.get("gamma");
            ModelParams::Svm(svm::Svm::fit(
                &z,
                &y,
                spec.get("c"),
                (gamma > 0.0).then_some(gamma),
                spec.get("tol"),
                spec.get_usize("max_iter"),
            ))
        }
        ClassifierKind::Logistic => ModelParams::Logistic(logistic::Logistic::fit(
            &z,
            &y,
            spec.get("l2"),
            spec.get_usize("max_iter"),
        )),
        ClassifierKind::Mlp => ModelParams::Mlp(mlp::Mlp::fit(
            &z,
            &y,
            spec.get_usize("hidden"),
            spec.get("step"),
            spec.get_usize("epochs"),
            spec.seed,
        )),
        ClassifierKind::RandomForest => ModelParams::RandomForest(forest::Forest::fit(
            &z,
            &y,
            spec.get_usize("trees"),
            spec.get_usize("max_features"),
            spec.seed,
        )),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        scaler,
        params,
    })
}

impl TrainedModel {
    pub fn dim(&self) -> usize {
        self.scaler.dim()
    }

    /// Raw decision scores; positive means genuine.
    pub fn scores(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        for (i, r) in x.iter().enumerate() {
            if r.len() != self.dim() {
                return Err(Error::invalid(format!(
                    "row {i} has {} features, model expects {}",
                    r.len(),
                    self.dim()
                )));
            }
        }
        Ok(x.iter()
            .map(|r| {
                let z = self.scaler.transform(r);
                match &self.params {
                    ModelParams::Knn(m) => m.score(&z),
                    ModelParams::Svm(m) => m.score(&z),
                    ModelParams::Logistic(m) => m.score(&z),
                    ModelParams::Mlp(m) => m.score(&z),
                    ModelParams::RandomForest(m) => m.score(&z),
                }
            })
            .collect())
    }
}

/// One label per row: genuine exactly when the decision score is positive.
pub fn predict(model: &TrainedModel, x: &[Vec<f64>]) -> Result<Vec<Label>> {
    Ok(model
        .scores(x)?
        .into_iter()
        .map(|s| if s > 0.0 { Label::Gen } else { Label::Imp })
        .collect())
}
