//! Per-user training sets, the baseline model grid, and zero-effort
//! evaluation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::{select_per_sensor, FeatureMatrix, Label, Provenance, Selection, DEFAULT_TOP_K};
use crate::learners::{smote, train, ClassifierKind, ClassifierSpec, TrainedModel, DEFAULT_K_NEIGHBORS};
use crate::render::Matrix;
use crate::seed;
use crate::signal::SensorCombo;
use crate::{Error, Result};

pub const DEFAULT_PER_IMPOSTOR: usize = 5;
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Unlabeled feature rows of one session, keyed by subject.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureStore {
    pub users: BTreeMap<String, FeatureMatrix>,
}

impl FeatureStore {
    pub fn insert(&mut self, user: &str, matrix: FeatureMatrix) {
        self.users.insert(user.to_string(), matrix);
    }

    pub fn get(&self, user: &str) -> Result<&FeatureMatrix> {
        self.users
            .get(user)
            .ok_or_else(|| Error::data(format!("no feature vectors for subject {user}")))
    }

    pub fn user_ids(&self) -> Vec<String> {
        self.users.keys().cloned().collect()
    }
}

fn labeled_copy(matrix: &mut FeatureMatrix, source: &FeatureMatrix, rows: &[usize], label: Label) -> Result<()> {
    if source.names != matrix.names {
        let who = source.provenance.first().map_or("?", |p| p.subject.as_str());
        return Err(Error::data(format!("subject {who} has a different feature schema")));
    }
    for &i in rows {
        matrix.push_row(source.rows[i].clone(), Some(label), source.provenance[i].clone())?;
    }
    Ok(())
}

/// All of the target's rows labeled genuine, plus up to `per_impostor` rows
/// drawn without replacement from every other subject, labeled impostor.
pub fn sample_training_rows(target: &str, store: &FeatureStore, per_impostor: usize, seed: u64) -> Result<FeatureMatrix> {
    if per_impostor == 0 {
        return Err(Error::invalid("per_impostor must be at least 1"));
    }
    let genuine = store.get(target)?;
    if genuine.is_empty() {
        return Err(Error::data(format!("subject {target} has no training windows")));
    }
    if store.users.len() < 2 {
        return Err(Error::invalid(format!("no impostor subjects besides {target}")));
    }
    let mut out = FeatureMatrix::new(genuine.names.clone());
    labeled_copy(&mut out, genuine, &(0..genuine.len()).collect::<Vec<_>>(), Label::Gen)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (user, m) in &store.users {
        if user == target {
            continue;
        }
        let mut rows = index::sample(&mut rng, m.len(), per_impostor.min(m.len())).into_vec();
        rows.sort_unstable();
        labeled_copy(&mut out, m, &rows, Label::Imp)?;
    }
    Ok(out)
}

/// Equalizes the classes by growing the genuine rows to the impostor count
/// with SMOTE. When genuine rows outnumber impostors they are subsampled
/// without replacement instead.
pub fn balance(matrix: &FeatureMatrix, seed: u64) -> Result<FeatureMatrix> {
    let gen: Vec<usize> = (0..matrix.len()).filter(|&i| matrix.labels[i] == Some(Label::Gen)).collect();
    let imp: Vec<usize> = (0..matrix.len()).filter(|&i| matrix.labels[i] == Some(Label::Imp)).collect();
    if gen.is_empty() || imp.is_empty() {
        return Err(Error::invalid("balancing needs both genuine and impostor rows"));
    }
    let mut out = FeatureMatrix::new(matrix.names.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if gen.len() > imp.len() {
        let mut keep: Vec<usize> = index::sample(&mut rng, gen.len(), imp.len())
            .into_iter()
            .map(|k| gen[k])
            .collect();
        keep.sort_unstable();
        labeled_copy(&mut out, matrix, &keep, Label::Gen)?;
    } else {
        let minority: Vec<Vec<f64>> = gen.iter().map(|&i| matrix.rows[i].clone()).collect();
        let grown = smote(&minority, imp.len(), DEFAULT_K_NEIGHBORS, seed)?;
        let subject = matrix.provenance[gen[0]].subject.clone();
        for (k, row) in grown.into_iter().enumerate() {
            let provenance = if k < gen.len() {
                matrix.provenance[gen[k]].clone()
            } else {
                Provenance {
                    subject: subject.clone(),
                    session: "smote".into(),
                    window: k - gen.len(),
                }
            };
            out.push_row(row, Some(Label::Gen), provenance)?;
        }
    }
    labeled_copy(&mut out, matrix, &imp, Label::Imp)?;
    Ok(out)
}

/// Sampling followed by balancing, on the full feature width.
pub fn assemble_training_set(target: &str, store: &FeatureStore, per_impostor: usize, seed: u64) -> Result<FeatureMatrix> {
    let sampled = sample_training_rows(target, store, per_impostor, seed::derive(seed, &["sample"]))?;
    balance(&sampled, seed::derive(seed, &["smote"]))
}

fn labels_of(matrix: &FeatureMatrix) -> Result<Vec<Label>> {
    matrix
        .labels
        .iter()
        .map(|l| l.ok_or_else(|| Error::invalid("unlabeled training row")))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub per_impostor: usize,
    pub top_k: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            per_impostor: DEFAULT_PER_IMPOSTOR,
            top_k: DEFAULT_TOP_K,
        }
    }
}

/// A trained classifier with everything needed to score raw feature rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredModel {
    pub version: u32,
    pub user: String,
    pub combo: SensorCombo,
    pub selection: Selection,
    pub model: TrainedModel,
}

impl StoredModel {
    pub fn kind(&self) -> ClassifierKind {
        self.model.spec.kind
    }

    pub fn file_name(&self) -> String {
        model_file_name(&self.user, self.combo, self.kind())
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.file_name());
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Json {
            path: path.clone(),
            source: e,
        })?;
        crate::render::write_text(&path, &(json + "\n"))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: StoredModel = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        if m.version != MODEL_FORMAT_VERSION {
            return Err(Error::data(format!(
                "{}: unsupported model version {}",
                path.display(),
                m.version
            )));
        }
        Ok(m)
    }

    /// Decision scores of raw rows after projecting onto the frozen selection.
    pub fn scores(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        let cols = self.selection.columns(&matrix.names)?;
        self.model.scores(&matrix.project(&cols).rows)
    }

    /// Whether each row is accepted as the genuine user.
    pub fn accepts(&self, matrix: &FeatureMatrix) -> Result<Vec<bool>> {
        Ok(self.scores(matrix)?.into_iter().map(|s| s > 0.0).collect())
    }
}

pub fn model_file_name(user: &str, combo: SensorCombo, kind: ClassifierKind) -> String {
    format!("{user}__{combo}__{kind}.json")
}

/// Selection, sampling, balancing and training, all on session-1 rows.
pub fn train_user_model(
    target: &str,
    combo: SensorCombo,
    spec: &ClassifierSpec,
    store: &FeatureStore,
    options: TrainOptions,
) -> Result<StoredModel> {
    let run = || -> Result<StoredModel> {
        let sampled = sample_training_rows(target, store, options.per_impostor, seed::derive(spec.seed, &["sample"]))?;
        let labels = labels_of(&sampled)?;
        let selection = select_per_sensor(&sampled, &labels, combo, options.top_k)?;
        let projected = sampled.project(&selection.columns(&sampled.names)?);
        let balanced = balance(&projected, seed::derive(spec.seed, &["smote"]))?;
        let model = train(spec, &balanced.rows, &labels_of(&balanced)?)?;
        Ok(StoredModel {
            version: MODEL_FORMAT_VERSION,
            user: target.to_string(),
            combo,
            selection,
            model,
        })
    };
    run().map_err(|e| e.context(format!("user {target}, combo {combo}, {}", spec.kind)))
}

/// Error rates at the fixed decision rule, with the underlying counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub far: f64,
    pub frr: f64,
    pub hter: f64,
    pub genuine_accepted: usize,
    pub genuine_rejected: usize,
    pub impostor_accepted: usize,
    pub impostor_rejected: usize,
}

impl EvalReport {
    pub fn from_counts(
        genuine_accepted: usize,
        genuine_rejected: usize,
        impostor_accepted: usize,
        impostor_rejected: usize,
    ) -> Result<Self> {
        let n_gen = genuine_accepted + genuine_rejected;
        let n_imp = impostor_accepted + impostor_rejected;
        if n_gen == 0 || n_imp == 0 {
            return Err(Error::invalid("evaluation needs genuine and impostor probes"));
        }
        let far = impostor_accepted as f64 / n_imp as f64;
        let frr = genuine_rejected as f64 / n_gen as f64;
        Ok(Self {
            far,
            frr,
            hter: (far + frr) / 2.0,
            genuine_accepted,
            genuine_rejected,
            impostor_accepted,
            impostor_rejected,
        })
    }

    pub fn from_decisions(genuine: &[bool], impostor: &[bool]) -> Result<Self> {
        let ga = genuine.iter().filter(|a| **a).count();
        let ia = impostor.iter().filter(|a| **a).count();
        Self::from_counts(ga, genuine.len() - ga, ia, impostor.len() - ia)
    }
}

/// FRR on the user's own session-2 windows, FAR on every other subject's
/// session-2 windows.
pub fn evaluate_zero_effort(model: &StoredModel, store: &FeatureStore) -> Result<EvalReport> {
    let genuine = model.accepts(store.get(&model.user)?)?;
    let mut impostor = Vec::new();
    for (user, m) in &store.users {
        if *user != model.user {
            impostor.extend(model.accepts(m)?);
        }
    }
    EvalReport::from_decisions(&genuine, &impostor)
        .map_err(|e| e.context(format!("evaluating {}", model.file_name())))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId {
    pub user: String,
    pub combo: SensorCombo,
    pub kind: ClassifierKind,
}

impl CellId {
    pub fn seed(&self, master: u64) -> u64 {
        seed::derive(master, &[&self.user, &self.combo.to_string(), self.kind.name()])
    }
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub id: CellId,
    pub result: std::result::Result<(StoredModel, EvalReport), String>,
}

/// Outcomes of a sweep in canonical (user, combo, kind) order.
#[derive(Debug, Clone, Default)]
pub struct BaselineGrid {
    pub cells: Vec<CellOutcome>,
}

impl BaselineGrid {
    pub fn successes(&self) -> impl Iterator<Item = (&StoredModel, &EvalReport)> {
        self.cells.iter().filter_map(|c| c.result.as_ref().ok().map(|(m, r)| (m, r)))
    }

    pub fn failures(&self) -> Vec<(&CellId, &str)> {
        self.cells
            .iter()
            .filter_map(|c| c.result.as_ref().err().map(|e| (&c.id, e.as_str())))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub master_seed: u64,
    pub train: TrainOptions,
}

/// Cells in canonical order: users sorted, combos canonical, kinds in
/// declaration order.
pub fn cell_ids(users: &[String], combos: &[SensorCombo], kinds: &[ClassifierKind]) -> Vec<CellId> {
    let mut users = users.to_vec();
    users.sort();
    users.dedup();
    let mut combos = combos.to_vec();
    combos.sort();
    combos.dedup();
    let mut kinds = kinds.to_vec();
    kinds.sort();
    kinds.dedup();
    let mut ids = Vec::with_capacity(users.len() * combos.len() * kinds.len());
    for user in &users {
        for &combo in &combos {
            for &kind in &kinds {
                ids.push(CellId {
                    user: user.clone(),
                    combo,
                    kind,
                });
            }
        }
    }
    ids
}

/// Trains and evaluates every cell. Runs on the current rayon pool; cell
/// failures are recorded rather than aborting the sweep.
pub fn sweep(
    users: &[String],
    combos: &[SensorCombo],
    kinds: &[ClassifierKind],
    session1: &FeatureStore,
    session2: &FeatureStore,
    options: SweepOptions,
) -> BaselineGrid {
    let cells = cell_ids(users, combos, kinds)
        .into_par_iter()
        .map(|id| {
            let spec = ClassifierSpec::new(id.kind, id.seed(options.master_seed));
            let result = train_user_model(&id.user, id.combo, &spec, session1, options.train)
                .and_then(|m| {
                    let r = evaluate_zero_effort(&m, session2)?;
                    Ok((m, r))
                })
                .map_err(|e| e.to_string());
            CellOutcome { id, result }
        })
        .collect();
    BaselineGrid { cells }
}

/// Mean FAR, FRR and HTER over users: rows are combos, columns are kinds.
pub fn grid_matrices(grid: &BaselineGrid) -> [Matrix; 3] {
    let cells: Vec<(SensorCombo, ClassifierKind, EvalReport)> =
        grid.successes().map(|(m, r)| (m.combo, m.kind(), *r)).collect();
    let attempted: Vec<(SensorCombo, ClassifierKind)> = grid.cells.iter().map(|c| (c.id.combo, c.id.kind)).collect();
    rate_matrices(&attempted, &cells)
}

/// Mean FAR, FRR and HTER per (combo, kind) of `reports`. Rows and columns
/// cover every attempted combo and kind; cells without a report stay empty.
pub fn rate_matrices(
    attempted: &[(SensorCombo, ClassifierKind)],
    reports: &[(SensorCombo, ClassifierKind, EvalReport)],
) -> [Matrix; 3] {
    let mut combos: Vec<SensorCombo> = attempted.iter().map(|c| c.0).collect();
    combos.sort();
    combos.dedup();
    let mut kinds: Vec<ClassifierKind> = attempted.iter().map(|c| c.1).collect();
    kinds.sort();
    kinds.dedup();
    let mut sums: BTreeMap<(SensorCombo, ClassifierKind), ([f64; 3], usize)> = BTreeMap::new();
    for (combo, kind, r) in reports {
        let e = sums.entry((*combo, *kind)).or_insert(([0.0; 3], 0));
        e.0[0] += r.far;
        e.0[1] += r.frr;
        e.0[2] += r.hter;
        e.1 += 1;
    }
    let blank = || {
        Matrix::new(
            "combo",
            combos.iter().map(|c| c.to_string()).collect(),
            kinds.iter().map(|k| k.to_string()).collect(),
        )
    };
    let mut out = [blank(), blank(), blank()];
    for (i, c) in combos.iter().enumerate() {
        for (j, k) in kinds.iter().enumerate() {
            if let Some((s, n)) = sums.get(&(*c, *k)) {
                for (m, v) in out.iter_mut().zip(s) {
                    m.set(i, j, v / *n as f64);
                }
            }
        }
    }
    out
}

/// Long-format per-cell baseline results.
pub fn cells_csv(grid: &BaselineGrid) -> String {
    let mut out = String::from(
        "user,combo,kind,far,frr,hter,genuine_accepted,genuine_rejected,impostor_accepted,impostor_rejected\n",
    );
    for (m, r) in grid.successes() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            m.user,
            m.combo,
            m.kind(),
            r.far,
            r.frr,
            r.hter,
            r.genuine_accepted,
            r.genuine_rejected,
            r.impostor_accepted,
            r.impostor_rejected
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(sizes: &[(&str, usize)]) -> FeatureStore {
        let mut s = FeatureStore::default();
        for (u, n) in sizes {
            let mut m = FeatureMatrix::new(vec!["f0".into(), "f1".into()]);
            for w in 0..*n {
                let base = u.len() as f64 * 10.0;
                m.push_row(
                    vec![base + w as f64, (w % 3) as f64],
                    None,
                    Provenance {
                        subject: u.to_string(),
                        session: "1".into(),
                        window: w,
                    },
                )
                .unwrap();
            }
            s.insert(u, m);
        }
        s
    }

    #[test]
    fn two_users_balance_to_impostor_count() {
        let s = store(&[("u1", 22), ("u22", 9)]);
        let m = assemble_training_set("u1", &s, 5, 1).unwrap();
        assert_eq!(m.len(), 10);
        assert_eq!(m.labels.iter().filter(|l| **l == Some(Label::Gen)).count(), 5);
    }

    #[test]
    fn few_impostor_rows_are_all_used() {
        let s = store(&[("u1", 4), ("u22", 2), ("u333", 9)]);
        let m = sample_training_rows("u1", &s, 5, 0).unwrap();
        let imp: Vec<&Provenance> = (0..m.len())
            .filter(|&i| m.labels[i] == Some(Label::Imp))
            .map(|i| &m.provenance[i])
            .collect();
        assert_eq!(imp.len(), 7);
        assert!(imp.iter().all(|p| p.subject != "u1"));
    }

    #[test]
    fn degenerate_requests_fail() {
        let s = store(&[("u1", 4), ("u22", 4)]);
        assert!(sample_training_rows("u1", &s, 0, 0).is_err());
        assert!(sample_training_rows("nobody", &s, 5, 0).is_err());
        let lone = store(&[("u1", 4)]);
        assert!(sample_training_rows("u1", &lone, 5, 0).is_err());
    }

    #[test]
    fn report_rates() {
        let r = EvalReport::from_decisions(&[true, true, false, true], &[false, true, false, false, false]).unwrap();
        assert_eq!(r.frr, 0.25);
        assert_eq!(r.far, 0.2);
        assert_eq!(r.hter, (0.2 + 0.25) / 2.0);
        assert!(EvalReport::from_decisions(&[], &[true]).is_err());
    }

    #[test]
    fn canonical_cell_order() {
        let combos = SensorCombo::all();
        let ids = cell_ids(
            &["u2".into(), "u1".into()],
            &[combos[4], combos[0]],
            &[ClassifierKind::Svm, ClassifierKind::Knn],
        );
        assert_eq!(ids.len(), 8);
        assert_eq!(ids[0].user, "u1");
        assert_eq!(ids[0].combo, combos[0]);
        assert_eq!(ids[0].kind, ClassifierKind::Knn);
        assert_ne!(ids[0].seed(1), ids[1].seed(1));
    }
}
