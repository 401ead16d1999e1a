//! The gait-pattern dictionary and the exhaustive dictionary attack.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::authbench::{BaselineGrid, EvalReport, StoredModel};
use crate::features::{featurize_recording, FeatureMatrix};
use crate::ingest::load_session_files;
use crate::learners::ClassifierKind;
use crate::render::Matrix;
use crate::signal::{ImuRecording, Sensor, SensorCombo};
use crate::{Error, Result};

pub const SPEED_MIN_MPH: f64 = 1.4;
pub const SPEED_MAX_MPH: f64 = 3.0;
pub const SPEED_STEP_MPH: f64 = 0.2;
pub const DEFAULT_SEVERE_THRESHOLD: f64 = 0.5;
/// Entries shorter than this are flagged (about 100 steps at normal cadence).
pub const DEFAULT_MIN_ENTRY_SECS: f64 = 60.0;

macro_rules! level_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "lowercase")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: [$name; 4] = [$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }

            /// Ordinal code 1..=4.
            pub fn rank(self) -> usize {
                self as usize + 1
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                Self::ALL
                    .into_iter()
                    .find(|l| l.as_str() == s)
                    .ok_or_else(|| Error::invalid(format!(
                        "unknown {} level `{s}`",
                        stringify!($name)
                    )))
            }
        }
    };
}

level_enum!(StepLength { Short => "short", Normal => "normal", Long => "long", Longer => "longer" });
level_enum!(StepWidth { Close => "close", Normal => "normal", Wide => "wide", Wider => "wider" });
level_enum!(ThighLift { Back => "back", Normal => "normal", Front => "front", Up => "up" });

/// The nine grid speeds, 1.4 to 3.0 mph.
pub fn speed_grid() -> Vec<f64> {
    (0..9).map(|i| ((SPEED_MIN_MPH + SPEED_STEP_MPH * i as f64) * 10.0).round() / 10.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorSetting {
    pub speed_mph: f64,
    pub step_length: StepLength,
    pub step_width: StepWidth,
    pub thigh_lift: ThighLift,
}

impl FactorSetting {
    pub fn natural(speed_mph: f64) -> Self {
        Self {
            speed_mph,
            step_length: StepLength::Normal,
            step_width: StepWidth::Normal,
            thigh_lift: ThighLift::Normal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.speed_mph.is_finite() && self.speed_mph > 0.0) {
            return Err(Error::invalid(format!("speed {} mph is not a positive number", self.speed_mph)));
        }
        Ok(())
    }

    /// Whether the speed sits on the nine-point grid.
    pub fn is_grid_conformant(&self) -> bool {
        speed_grid().iter().any(|s| (s - self.speed_mph).abs() < 1e-9)
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        self.speed_mph
            .total_cmp(&other.speed_mph)
            .then(self.step_length.cmp(&other.step_length))
            .then(self.step_width.cmp(&other.step_width))
            .then(self.thigh_lift.cmp(&other.thigh_lift))
    }
}

/// One of the four controllable gait factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Speed,
    StepLength,
    StepWidth,
    ThighLift,
}

impl Factor {
    pub const ALL: [Factor; 4] = [Factor::Speed, Factor::StepLength, Factor::StepWidth, Factor::ThighLift];

    pub fn as_str(self) -> &'static str {
        match self {
            Factor::Speed => "speed",
            Factor::StepLength => "step_length",
            Factor::StepWidth => "step_width",
            Factor::ThighLift => "thigh_lift",
        }
    }

    /// Numeric level: speed in mph, ordinal levels rank-coded 1..=4.
    pub fn level(self, s: &FactorSetting) -> f64 {
        match self {
            Factor::Speed => s.speed_mph,
            Factor::StepLength => s.step_length.rank() as f64,
            Factor::StepWidth => s.step_width.rank() as f64,
            Factor::ThighLift => s.thigh_lift.rank() as f64,
        }
    }

    /// Whether two settings agree on every factor except this one.
    pub fn others_equal(self, a: &FactorSetting, b: &FactorSetting) -> bool {
        Factor::ALL
            .iter()
            .filter(|f| **f != self)
            .all(|f| f.level(a) == f.level(b))
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn speed_text(v: f64) -> String {
    if ((v * 10.0).round() / 10.0 - v).abs() < 1e-12 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

/// Dictionary key: imitator plus factor levels. Ordered by imitator, then
/// speed, step length, step width and thigh lift.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryKey {
    pub imitator_id: String,
    pub setting: FactorSetting,
}

impl PartialEq for EntryKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for EntryKey {}

impl PartialOrd for EntryKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EntryKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.imitator_id
            .cmp(&other.imitator_id)
            .then_with(|| self.setting.cmp_key(&other.setting))
    }
}

impl fmt::Display for EntryKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.setting;
        write!(
            f,
            "{}:{}mph:{}:{}:{}",
            self.imitator_id,
            speed_text(s.speed_mph),
            s.step_length,
            s.step_width,
            s.thigh_lift
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryFiles {
    pub la: String,
    pub gy: String,
    pub ma: String,
    pub rv: String,
}

impl EntryFiles {
    pub fn get(&self, sensor: Sensor) -> &str {
        match sensor {
            Sensor::La => &self.la,
            Sensor::Gy => &self.gy,
            Sensor::Ma => &self.ma,
            Sensor::Rv => &self.rv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub imitator_id: String,
    pub speed_mph: f64,
    pub step_length: StepLength,
    pub step_width: StepWidth,
    pub thigh_lift: ThighLift,
    pub files: EntryFiles,
}

impl ManifestEntry {
    pub fn key(&self) -> EntryKey {
        EntryKey {
            imitator_id: self.imitator_id.clone(),
            setting: FactorSetting {
                speed_mph: self.speed_mph,
                step_length: self.step_length,
                step_width: self.step_width,
                thigh_lift: self.thigh_lift,
            },
        }
    }
}

/// Dictionary manifest; file paths are relative to the manifest's directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}

#[derive(Debug, Clone)]
pub struct DictionaryEntry {
    pub key: EntryKey,
    pub recording: ImuRecording,
    /// Shorter than the minimum entry duration.
    pub short: bool,
    /// Speed off the nine-point grid.
    pub off_grid: bool,
}

/// Validated entries in canonical key order.
#[derive(Debug, Clone, Default)]
pub struct Dictionary {
    pub entries: Vec<DictionaryEntry>,
}

impl Dictionary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Loads every manifest entry. Duplicate keys and unreadable files are
/// collected and reported together.
pub fn build_dictionary(manifest: &Manifest, base_dir: &Path, min_duration_secs: f64) -> Result<Dictionary> {
    let mut seen = BTreeSet::new();
    let mut duplicates = Vec::new();
    let mut missing = Vec::new();
    for e in &manifest.entries {
        let key = e.key();
        key.setting.validate().map_err(|err| err.context(key.to_string()))?;
        if !seen.insert(key.clone()) {
            duplicates.push(key.to_string());
        }
        for s in Sensor::ALL {
            let p = base_dir.join(e.files.get(s));
            if !p.is_file() {
                missing.push(p.display().to_string());
            }
        }
    }
    if !duplicates.is_empty() || !missing.is_empty() {
        let mut msg = String::from("dictionary manifest is invalid");
        if !duplicates.is_empty() {
            msg.push_str(&format!("; duplicate keys: {}", duplicates.join(", ")));
        }
        if !missing.is_empty() {
            msg.push_str(&format!("; missing files: {}", missing.join(", ")));
        }
        return Err(Error::data(msg));
    }
    let mut entries = manifest
        .entries
        .par_iter()
        .map(|e| {
            let key = e.key();
            let files: BTreeMap<Sensor, PathBuf> =
                Sensor::ALL.into_iter().map(|s| (s, base_dir.join(e.files.get(s)))).collect();
            let recording = load_session_files(&files, &e.imitator_id, &key.to_string())
                .map_err(|err| err.context(format!("dictionary entry {key}")))?;
            Ok(DictionaryEntry {
                short: recording.duration() < min_duration_secs,
                off_grid: !key.setting.is_grid_conformant(),
                key,
                recording,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(Dictionary { entries })
}

pub fn load_dictionary(manifest_path: &Path, min_duration_secs: f64) -> Result<Dictionary> {
    let manifest = Manifest::load(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    build_dictionary(&manifest, base, min_duration_secs)
}

/// All windows of one entry over every sensor.
#[derive(Debug, Clone)]
pub struct EntryFeatures {
    pub key: EntryKey,
    pub matrix: FeatureMatrix,
}

pub fn featurize_dictionary(dictionary: &Dictionary, window: f64, slide: f64) -> Result<Vec<EntryFeatures>> {
    dictionary
        .entries
        .par_iter()
        .map(|e| {
            Ok(EntryFeatures {
                key: e.key.clone(),
                matrix: featurize_recording(&e.recording, window, slide)
                    .map_err(|err| err.context(format!("dictionary entry {}", e.key)))?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryResult {
    pub key: EntryKey,
    pub accepted: usize,
    pub windows: usize,
    pub far: f64,
}

/// Fraction of an entry's windows the model accepts.
pub fn attack_entry(model: &StoredModel, entry: &EntryFeatures) -> Result<EntryResult> {
    if entry.matrix.is_empty() {
        return Err(Error::invalid(format!("dictionary entry {} has no windows", entry.key)));
    }
    let accepted = model.accepts(&entry.matrix)?.into_iter().filter(|a| *a).count();
    let windows = entry.matrix.len();
    Ok(EntryResult {
        key: entry.key.clone(),
        accepted,
        windows,
        far: accepted as f64 / windows as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserAttack {
    /// One result per entry, in the order the entries were given.
    pub entries: Vec<EntryResult>,
    /// Index of the best entry: highest FAR, ties to the smallest key.
    pub best: usize,
}

impl UserAttack {
    pub fn best_entry(&self) -> &EntryResult {
        &self.entries[self.best]
    }

    pub fn best_far(&self) -> f64 {
        self.best_entry().far
    }
}

/// Index of the maximum FAR, ties broken by canonical key order.
pub fn best_index(results: &[EntryResult]) -> Option<usize> {
    (0..results.len()).reduce(|b, i| {
        match results[i].far.total_cmp(&results[b].far) {
            Ordering::Greater => i,
            Ordering::Equal if results[i].key < results[b].key => i,
            _ => b,
        }
    })
}

pub fn attack_user(model: &StoredModel, entries: &[EntryFeatures]) -> Result<UserAttack> {
    if entries.is_empty() {
        return Err(Error::invalid("dictionary is empty"));
    }
    let results = entries
        .iter()
        .map(|e| attack_entry(model, e))
        .collect::<Result<Vec<_>>>()?;
    let best = best_index(&results).expect("nonempty");
    Ok(UserAttack { entries: results, best })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackCell {
    pub user: String,
    pub combo: SensorCombo,
    pub kind: ClassifierKind,
    pub zero: EvalReport,
    pub attack: UserAttack,
}

impl AttackCell {
    pub fn dict_far(&self) -> f64 {
        self.attack.best_far()
    }

    /// HTER with the attacked FAR and the unchanged zero-effort FRR.
    pub fn dict_hter(&self) -> f64 {
        (self.dict_far() + self.zero.frr) / 2.0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub cells: Vec<AttackCell>,
    /// Cells without a usable baseline, with the reason.
    pub skipped: Vec<String>,
}

/// Attacks every model with every entry. Cells keep the order of `models`.
pub fn attack_matrix(models: &[(StoredModel, EvalReport)], entries: &[EntryFeatures]) -> Result<AttackReport> {
    let cells = models
        .par_iter()
        .map(|(m, zero)| {
            Ok(AttackCell {
                user: m.user.clone(),
                combo: m.combo,
                kind: m.kind(),
                zero: *zero,
                attack: attack_user(m, entries).map_err(|e| e.context(m.file_name()))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AttackReport {
        cells,
        skipped: Vec::new(),
    })
}

/// Attacks the successful cells of a sweep and lists the failed ones.
pub fn attack_grid(grid: &BaselineGrid, entries: &[EntryFeatures]) -> Result<AttackReport> {
    let models: Vec<(StoredModel, EvalReport)> = grid.successes().map(|(m, r)| (m.clone(), *r)).collect();
    let mut report = attack_matrix(&models, entries)?;
    report.skipped = grid
        .failures()
        .into_iter()
        .map(|(id, e)| format!("{} {} {}: {e}", id.user, id.combo, id.kind))
        .collect();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Menagerie {
    Unaffected,
    Impacted,
    SeverelyImpacted,
}

impl Menagerie {
    pub fn as_str(self) -> &'static str {
        match self {
            Menagerie::Unaffected => "unaffected",
            Menagerie::Impacted => "impacted",
            Menagerie::SeverelyImpacted => "severely_impacted",
        }
    }
}

impl fmt::Display for Menagerie {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Unaffected when no entry beats the zero-effort FAR; severely impacted
/// when the best entry reaches `severe_threshold`; impacted otherwise.
pub fn menagerie_label(zero_far: f64, best_far: f64, severe_threshold: f64) -> Menagerie {
    if best_far <= zero_far {
        Menagerie::Unaffected
    } else if best_far >= severe_threshold {
        Menagerie::SeverelyImpacted
    } else {
        Menagerie::Impacted
    }
}

pub fn classify_menagerie(
    report: &AttackReport,
    combo: SensorCombo,
    kind: ClassifierKind,
    severe_threshold: f64,
) -> BTreeMap<String, Menagerie> {
    report
        .cells
        .iter()
        .filter(|c| c.combo == combo && c.kind == kind)
        .map(|c| {
            (
                c.user.clone(),
                menagerie_label(c.zero.far, c.dict_far(), severe_threshold),
            )
        })
        .collect()
}

/// `user,combo,kind,entry_key,entry_far`, one row per (cell, entry).
pub fn long_csv(report: &AttackReport) -> String {
    let mut out = String::from("user,combo,kind,entry_key,entry_far\n");
    for c in &report.cells {
        for e in &c.attack.entries {
            out.push_str(&format!("{},{},{},{},{}\n", c.user, c.combo, c.kind, e.key, e.far));
        }
    }
    out
}

pub fn summary_csv(report: &AttackReport) -> String {
    let mut out = String::from("user,combo,kind,zero_far,frr,zero_hter,dict_far,dict_hter,best_entry\n");
    for c in &report.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.user,
            c.combo,
            c.kind,
            c.zero.far,
            c.zero.frr,
            c.zero.hter,
            c.dict_far(),
            c.dict_hter(),
            c.attack.best_entry().key
        ));
    }
    out
}

/// Mean zero FAR, dictionary FAR, zero HTER and dictionary HTER over users,
/// each as a combos-by-kinds matrix.
pub fn heatmaps(report: &AttackReport) -> [Matrix; 4] {
    let mut combos: Vec<SensorCombo> = report.cells.iter().map(|c| c.combo).collect();
    combos.sort();
    combos.dedup();
    let mut kinds: Vec<ClassifierKind> = report.cells.iter().map(|c| c.kind).collect();
    kinds.sort();
    kinds.dedup();
    let mut sums: BTreeMap<(SensorCombo, ClassifierKind), ([f64; 4], usize)> = BTreeMap::new();
    for c in &report.cells {
        let e = sums.entry((c.combo, c.kind)).or_insert(([0.0; 4], 0));
        for (s, v) in e.0.iter_mut().zip([c.zero.far, c.dict_far(), c.zero.hter, c.dict_hter()]) {
            *s += v;
        }
        e.1 += 1;
    }
    let blank = || {
        Matrix::new(
            "combo",
            combos.iter().map(|c| c.to_string()).collect(),
            kinds.iter().map(|k| k.to_string()).collect(),
        )
    };
    let mut out = [blank(), blank(), blank(), blank()];
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

/// The (combo, kind) with the lowest mean zero-effort HTER over users. Ties
/// go to the first cell in canonical (combo, kind) order.
pub fn best_cell(report: &AttackReport) -> Option<(SensorCombo, ClassifierKind)> {
    let mut sums: BTreeMap<(SensorCombo, ClassifierKind), (f64, usize)> = BTreeMap::new();
    for c in &report.cells {
        let e = sums.entry((c.combo, c.kind)).or_insert((0.0, 0));
        e.0 += c.zero.hter;
        e.1 += 1;
    }
    let mut best: Option<((SensorCombo, ClassifierKind), f64)> = None;
    for (cell, (sum, n)) in sums {
        let mean = sum / n as f64;
        if best.is_none_or(|(_, b)| mean < b) {
            best = Some((cell, mean));
        }
    }
    best.map(|(cell, _)| cell)
}

/// Per-user view of one (combo, kind): columns are users sorted by
/// dictionary FAR (descending, ties by user id); rows are zero FAR,
/// dictionary FAR, zero HTER and dictionary HTER.
pub fn user_matrix(report: &AttackReport, combo: SensorCombo, kind: ClassifierKind) -> Matrix {
    let mut cells: Vec<&AttackCell> = report
        .cells
        .iter()
        .filter(|c| c.combo == combo && c.kind == kind)
        .collect();
    cells.sort_by(|a, b| b.dict_far().total_cmp(&a.dict_far()).then(a.user.cmp(&b.user)));
    let rows = ["zero_far", "dict_far", "zero_hter", "dict_hter"];
    let mut m = Matrix::new(
        "metric",
        rows.iter().map(|r| r.to_string()).collect(),
        cells.iter().map(|c| c.user.clone()).collect(),
    );
    for (j, c) in cells.iter().enumerate() {
        for (i, v) in [c.zero.far, c.dict_far(), c.zero.hter, c.dict_hter()].into_iter().enumerate() {
            m.set(i, j, v);
        }
    }
    m
}

/// Users by entries FAR matrix for one (combo, kind), rows in user order.
pub fn entry_matrix(report: &AttackReport, combo: SensorCombo, kind: ClassifierKind) -> Matrix {
    let cells: Vec<&AttackCell> = report
        .cells
        .iter()
        .filter(|c| c.combo == combo && c.kind == kind)
        .collect();
    let mut keys: Vec<&EntryKey> = cells.iter().flat_map(|c| c.attack.entries.iter().map(|e| &e.key)).collect();
    keys.sort();
    keys.dedup();
    let mut m = Matrix::new(
        "user",
        cells.iter().map(|c| c.user.clone()).collect(),
        keys.iter().map(|k| k.to_string()).collect(),
    );
    for (i, c) in cells.iter().enumerate() {
        for e in &c.attack.entries {
            let j = keys.binary_search(&&e.key).expect("key listed");
            m.set(i, j, e.far);
        }
    }
    m
}

/// Zero-effort and best-entry FAR per user for one (combo, kind).
pub fn distribution_csv(report: &AttackReport, combo: SensorCombo, kind: ClassifierKind, severe_threshold: f64) -> String {
    let mut out = String::from("user,zero_far,dict_far,menagerie\n");
    for c in report.cells.iter().filter(|c| c.combo == combo && c.kind == kind) {
        out.push_str(&format!(
            "{},{},{},{}\n",
            c.user,
            c.zero.far,
            c.dict_far(),
            menagerie_label(c.zero.far, c.dict_far(), severe_threshold)
        ));
    }
    out
}
