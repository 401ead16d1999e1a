//! The six commands. Each reads from the data root and/or earlier outputs,
//! owns a set of output directories that it clears before writing, and
//! finishes by writing its manifest.

use std::path::{Path, PathBuf};

use gaitdict::authbench::{
    cells_csv, rate_matrices, sweep, EvalReport, FeatureStore, StoredModel, SweepOptions, TrainOptions,
};
use gaitdict::dictattack::{
    attack_matrix, best_cell, distribution_csv, entry_matrix, featurize_dictionary, heatmaps, load_dictionary,
    long_csv, summary_csv, user_matrix, AttackReport, Dictionary, Factor, Manifest, DEFAULT_MIN_ENTRY_SECS,
};
use gaitdict::eda::{
    correlations_csv, default_overlap_channel, factor_feature_correlations, imitators, overlap_heatmap,
    DEFAULT_ALPHA, DEFAULT_EDA_FEATURES, DEFAULT_OVERLAP_BINS,
};
use gaitdict::features::{featurize_recording, FeatureMatrix};
use gaitdict::ingest::{load_session_dir, sensor_file_name, write_recording};
use gaitdict::learners::ClassifierKind;
use gaitdict::render::{write_text, Format, Matrix};
use gaitdict::signal::{ImuRecording, Sensor, SensorCombo};
use gaitdict::synth::{generate_corpus, CORPUS_FILE, DICTIONARY_DIR, DICTIONARY_MANIFEST, GENUINE_DIR};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::manifest::{digest_all, RunManifest, MANIFEST_DIR};
use crate::{CliError, Command, RunConfig};

pub const SESSIONS: [&str; 2] = ["1", "2"];
const BASELINE_FILE: &str = "train/baseline.json";
const ATTACK_FILE: &str = "attack/report.json";

/// Collects the files a stage writes, relative to the output root.
struct Outputs<'a> {
    root: &'a Path,
    files: Vec<PathBuf>,
}

impl<'a> Outputs<'a> {
    fn new(root: &'a Path) -> Self {
        Self { root, files: Vec::new() }
    }

    fn text(&mut self, rel: impl Into<PathBuf>, contents: &str) -> Result<(), CliError> {
        let rel = rel.into();
        write_text(&self.root.join(&rel), contents)?;
        self.files.push(rel);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        self.text(rel, &(json + "\n"))
    }

    /// `<stem>.csv` always, `<stem>.svg` as well for the SVG format.
    fn matrix(&mut self, stem: &str, m: &Matrix, format: Format) -> Result<(), CliError> {
        self.text(format!("{stem}.csv"), &m.to_csv(4)?)?;
        if format == Format::Svg {
            self.text(format!("{stem}.svg"), &m.to_svg()?)?;
        }
        Ok(())
    }
}

/// Removes stage-owned directories so no stale artifact survives a rerun.
fn clear(root: &Path, dirs: &[&str]) -> Result<(), CliError> {
    for d in dirs {
        let p = root.join(d);
        if p.exists() {
            std::fs::remove_dir_all(&p).map_err(|e| CliError::Data(format!("cannot clear {}: {e}", p.display())))?;
        }
    }
    Ok(())
}

fn finish(
    command: Command,
    config: &RunConfig,
    root: &Path,
    inputs: Vec<crate::manifest::FileDigest>,
    outputs: Outputs<'_>,
    failures: Vec<String>,
) -> Result<RunManifest, CliError> {
    let mut fingerprint = config.fingerprint();
    if command == Command::Synth {
        fingerprint["synth"] = serde_json::to_value(&config.synth).map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let manifest = RunManifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: fingerprint,
        seed: config.seed,
        inputs,
        outputs: digest_all(if command == Command::Synth { "data" } else { "out" }, root, &outputs.files)?,
        failures: failures.clone(),
    };
    manifest.write(root)?;
    if failures.is_empty() {
        Ok(manifest)
    } else {
        Err(CliError::Partial(failures))
    }
}

pub fn synth(config: &RunConfig) -> Result<RunManifest, CliError> {
    let root = &config.data;
    let mut synth = config.synth.clone();
    synth.seed = config.seed;
    synth.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let owned = [GENUINE_DIR, DICTIONARY_DIR, MANIFEST_DIR];
    if owned.iter().any(|d| root.join(d).exists()) && !root.join(CORPUS_FILE).exists() {
        return Err(CliError::Config(format!(
            "{} holds data that was not generated here; refusing to overwrite",
            root.display()
        )));
    }
    clear(root, &owned)?;
    let (_, files) = generate_corpus(&synth, root)?;
    let mut outputs = Outputs::new(root);
    outputs.files = files;
    let config = RunConfig {
        synth,
        ..config.clone()
    };
    finish(Command::Synth, &config, root, Vec::new(), outputs, Vec::new())
}

/// One normalized genuine session and its windows.
pub struct GenuineSession {
    pub recording: ImuRecording,
    pub features: FeatureMatrix,
}

pub struct GenuineData {
    pub sessions: Vec<GenuineSession>,
    pub session1: FeatureStore,
    pub session2: FeatureStore,
    /// Files read, relative to the data root.
    pub inputs: Vec<PathBuf>,
}

fn sorted_dirs(dir: &Path) -> Result<Vec<String>, CliError> {
    let rd = std::fs::read_dir(dir).map_err(|e| CliError::Data(format!("cannot list {}: {e}", dir.display())))?;
    let mut names = Vec::new();
    for entry in rd {
        let entry = entry.map_err(|e| CliError::Data(e.to_string()))?;
        if entry.path().is_dir() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

/// Reads `genuine/<subject>/session<k>/<sensor>.csv` for sessions 1 and 2
/// of every subject, normalizes and windows them.
pub fn load_genuine(config: &RunConfig) -> Result<GenuineData, CliError> {
    let base = config.data.join(GENUINE_DIR);
    if !base.is_dir() {
        return Err(CliError::Data(format!("no genuine data directory at {}", base.display())));
    }
    let subjects = sorted_dirs(&base)?;
    if subjects.len() < 2 {
        return Err(CliError::Data(format!(
            "need at least 2 subjects under {}, found {}",
            base.display(),
            subjects.len()
        )));
    }
    let mut jobs = Vec::new();
    let mut inputs = Vec::new();
    for s in &subjects {
        for k in SESSIONS {
            let rel = PathBuf::from(GENUINE_DIR).join(s).join(format!("session{k}"));
            if !config.data.join(&rel).is_dir() {
                return Err(CliError::Data(format!("subject {s}: missing session {k} data")));
            }
            for sensor in Sensor::ALL {
                let f = rel.join(sensor_file_name(sensor));
                if config.data.join(&f).exists() {
                    inputs.push(f);
                }
            }
            jobs.push((s.clone(), k, rel));
        }
    }
    let sessions = jobs
        .par_iter()
        .map(|(s, k, rel)| {
            let recording = load_session_dir(&config.data.join(rel), s, k)
                .map_err(|e| CliError::Data(format!("subject {s} session {k}: {e}")))?;
            let features = featurize_recording(&recording, config.window, config.slide)
                .map_err(|e| CliError::Data(format!("subject {s} session {k}: {e}")))?;
            if features.is_empty() {
                return Err(CliError::Data(format!(
                    "subject {s} session {k}: recording is shorter than one window"
                )));
            }
            Ok(GenuineSession { recording, features })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut session1 = FeatureStore::default();
    let mut session2 = FeatureStore::default();
    for g in &sessions {
        let store = if g.recording.session == SESSIONS[0] { &mut session1 } else { &mut session2 };
        store.insert(&g.recording.subject_id, g.features.clone());
    }
    Ok(GenuineData {
        sessions,
        session1,
        session2,
        inputs,
    })
}

pub fn ingest(config: &RunConfig) -> Result<RunManifest, CliError> {
    let data = load_genuine(config)?;
    let root = &config.out;
    clear(root, &["ingest"])?;
    let mut outputs = Outputs::new(root);
    let mut summary = String::from("subject,session,sampling_rate,samples,duration_secs,windows\n");
    for g in &data.sessions {
        let r = &g.recording;
        let rel = PathBuf::from("ingest/genuine").join(&r.subject_id).join(format!("session{}", r.session));
        write_recording(&root.join(&rel), r)?;
        for sensor in r.sensors() {
            outputs.files.push(rel.join(sensor_file_name(sensor)));
        }
        outputs.text(
            format!("ingest/features/session{}/{}.csv", r.session, r.subject_id),
            &g.features.to_csv(),
        )?;
        summary.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.subject_id,
            r.session,
            r.sampling_rate(),
            r.len(),
            r.duration(),
            g.features.len()
        ));
    }
    outputs.text("ingest/recordings.csv", &summary)?;

    let mut inputs = data.inputs;
    if config.data.join(DICTIONARY_MANIFEST).exists() {
        let (dictionary, files) = load_dictionary_files(config)?;
        inputs.extend(files);
        let features = featurize_dictionary(&dictionary, config.window, config.slide)?;
        let mut csv = String::from("entry_key,duration_secs,windows,short,off_grid\n");
        for (e, f) in dictionary.entries.iter().zip(&features) {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                e.key,
                e.recording.duration(),
                f.matrix.len(),
                e.short,
                e.off_grid
            ));
        }
        outputs.text("ingest/dictionary.csv", &csv)?;
    }
    let inputs = digest_all("data", &config.data, &inputs)?;
    finish(Command::Ingest, config, root, inputs, outputs, Vec::new())
}

/// The dictionary under the data root and the files it was read from.
fn load_dictionary_files(config: &RunConfig) -> Result<(Dictionary, Vec<PathBuf>), CliError> {
    let path = config.data.join(DICTIONARY_MANIFEST);
    let manifest = Manifest::load(&path)?;
    let dictionary = load_dictionary(&path, DEFAULT_MIN_ENTRY_SECS)?;
    let base = Path::new(DICTIONARY_MANIFEST).parent().unwrap_or(Path::new(""));
    let mut files = vec![PathBuf::from(DICTIONARY_MANIFEST)];
    for e in &manifest.entries {
        for sensor in Sensor::ALL {
            files.push(base.join(e.files.get(sensor)));
        }
    }
    Ok((dictionary, files))
}

/// One cell of the stored baseline grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    pub user: String,
    pub combo: SensorCombo,
    pub kind: ClassifierKind,
    /// Model file under `models/`, for successful cells.
    pub model: Option<String>,
    pub report: Option<EvalReport>,
    pub error: Option<String>,
}

pub fn train(config: &RunConfig) -> Result<RunManifest, CliError> {
    let data = load_genuine(config)?;
    let users = data.session1.user_ids();
    let grid = sweep(
        &users,
        &config.combos,
        &config.classifiers,
        &data.session1,
        &data.session2,
        SweepOptions {
            master_seed: config.seed,
            train: TrainOptions {
                per_impostor: config.per_impostor,
                top_k: config.top_k,
            },
        },
    );
    let root = &config.out;
    clear(root, &["models", "train"])?;
    let mut outputs = Outputs::new(root);
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for cell in &grid.cells {
        let id = &cell.id;
        let mut record = BaselineRecord {
            user: id.user.clone(),
            combo: id.combo,
            kind: id.kind,
            model: None,
            report: None,
            error: None,
        };
        match &cell.result {
            Ok((model, report)) => {
                model.save(&root.join("models"))?;
                outputs.files.push(PathBuf::from("models").join(model.file_name()));
                record.model = Some(model.file_name());
                record.report = Some(*report);
            }
            Err(e) => {
                failures.push(format!("{} {} {}: {e}", id.user, id.combo, id.kind));
                record.error = Some(e.clone());
            }
        }
        records.push(record);
    }
    outputs.json(BASELINE_FILE, &records)?;
    outputs.text("train/cells.csv", &cells_csv(&grid))?;
    let [far, frr, hter] = baseline_matrices(&records);
    outputs.text("train/far.csv", &far.to_csv(4)?)?;
    outputs.text("train/frr.csv", &frr.to_csv(4)?)?;
    outputs.text("train/hter.csv", &hter.to_csv(4)?)?;
    let mut fail_csv = String::from("user,combo,kind,error\n");
    for r in records.iter().filter(|r| r.error.is_some()) {
        let msg = r.error.as_deref().unwrap_or_default().replace(['\n', ','], " ");
        fail_csv.push_str(&format!("{},{},{},{msg}\n", r.user, r.combo, r.kind));
    }
    outputs.text("train/failures.csv", &fail_csv)?;
    let inputs = digest_all("data", &config.data, &data.inputs)?;
    finish(Command::Train, config, root, inputs, outputs, failures)
}

fn baseline_matrices(records: &[BaselineRecord]) -> [Matrix; 3] {
    let attempted: Vec<(SensorCombo, ClassifierKind)> = records.iter().map(|r| (r.combo, r.kind)).collect();
    let reports: Vec<(SensorCombo, ClassifierKind, EvalReport)> = records
        .iter()
        .filter_map(|r| r.report.map(|rep| (r.combo, r.kind, rep)))
        .collect();
    rate_matrices(&attempted, &reports)
}

pub fn load_baseline(root: &Path) -> Result<Vec<BaselineRecord>, CliError> {
    let path = root.join(BASELINE_FILE);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Data(format!("cannot read {} (run `train` first): {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("bad baseline {}: {e}", path.display())))
}

pub fn load_attack_report(root: &Path) -> Result<AttackReport, CliError> {
    let path = root.join(ATTACK_FILE);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Data(format!("cannot read {} (run `attack` first): {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("bad attack report {}: {e}", path.display())))
}

pub fn attack(config: &RunConfig) -> Result<RunManifest, CliError> {
    let root = &config.out;
    let records: Vec<BaselineRecord> = load_baseline(root)?
        .into_iter()
        .filter(|r| config.combos.contains(&r.combo) && config.classifiers.contains(&r.kind))
        .collect();
    let skipped: Vec<String> = records
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("{} {} {}: {e}", r.user, r.combo, r.kind)))
        .collect();
    let usable: Vec<(&BaselineRecord, &String, EvalReport)> = records
        .iter()
        .filter_map(|r| Some((r, r.model.as_ref()?, r.report?)))
        .collect();
    if usable.is_empty() {
        return Err(CliError::Data("no trained models match the selected combos and classifiers".into()));
    }
    let model_files: Vec<PathBuf> = usable.iter().map(|(_, f, _)| PathBuf::from("models").join(f)).collect();
    let models = usable
        .par_iter()
        .zip(&model_files)
        .map(|((_, _, zero), f)| Ok((StoredModel::load(&root.join(f))?, *zero)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let (dictionary, dict_files) = load_dictionary_files(config)?;
    if dictionary.is_empty() {
        return Err(CliError::Data("dictionary is empty".into()));
    }
    let features = featurize_dictionary(&dictionary, config.window, config.slide)?;
    let mut report = attack_matrix(&models, &features)?;
    report.skipped = skipped.clone();

    clear(root, &["attack"])?;
    let mut outputs = Outputs::new(root);
    outputs.json(ATTACK_FILE, &report)?;
    outputs.text("attack/long.csv", &long_csv(&report))?;
    outputs.text("attack/summary.csv", &summary_csv(&report))?;
    let mut entries = String::from("entry_key,windows,short,off_grid\n");
    for (e, f) in dictionary.entries.iter().zip(&features) {
        entries.push_str(&format!("{},{},{},{}\n", e.key, f.matrix.len(), e.short, e.off_grid));
    }
    outputs.text("attack/entries.csv", &entries)?;
    if let Some((combo, kind)) = best_cell(&report) {
        outputs.text("attack/best_cell.csv", &best_cell_csv(&report, combo, kind))?;
        outputs.text(
            "attack/distribution.csv",
            &distribution_csv(&report, combo, kind, config.severe_threshold),
        )?;
    }
    let mut inputs = digest_all("data", &config.data, &dict_files)?;
    let mut stored = model_files;
    stored.push(PathBuf::from(BASELINE_FILE));
    inputs.extend(digest_all("out", root, &stored)?);
    finish(Command::Attack, config, root, inputs, outputs, skipped)
}

fn best_cell_csv(report: &AttackReport, combo: SensorCombo, kind: ClassifierKind) -> String {
    let cells: Vec<_> = report.cells.iter().filter(|c| c.combo == combo && c.kind == kind).collect();
    let n = cells.len() as f64;
    let mean = |f: &dyn Fn(&gaitdict::dictattack::AttackCell) -> f64| cells.iter().map(|c| f(c)).sum::<f64>() / n;
    format!(
        "combo,kind,users,zero_far,frr,zero_hter,dict_far,dict_hter\n{combo},{kind},{},{},{},{},{},{}\n",
        cells.len(),
        mean(&|c| c.zero.far),
        mean(&|c| c.zero.frr),
        mean(&|c| c.zero.hter),
        mean(&|c| c.dict_far()),
        mean(&|c| c.dict_hter()),
    )
}

pub fn eda(config: &RunConfig) -> Result<RunManifest, CliError> {
    let (dictionary, dict_files) = load_dictionary_files(config)?;
    let features = featurize_dictionary(&dictionary, config.window, config.slide)?;
    let names: Vec<String> = DEFAULT_EDA_FEATURES.iter().map(|s| s.to_string()).collect();
    let channel = default_overlap_channel();
    let ids = imitators(&dictionary);
    let tasks: Vec<(&String, Factor)> = ids.iter().flat_map(|i| Factor::ALL.map(|f| (i, f))).collect();
    let results = tasks
        .par_iter()
        .map(|&(imitator, factor)| {
            let cells = factor_feature_correlations(&features, imitator, factor, &names, DEFAULT_ALPHA).ok();
            let grid = overlap_heatmap(&dictionary, imitator, factor, channel, config.window, DEFAULT_OVERLAP_BINS)?;
            Ok((cells, grid))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let root = &config.out;
    clear(root, &["eda"])?;
    let mut outputs = Outputs::new(root);
    let mut all_cells = Vec::new();
    let mut notes = String::from("imitator,factor,note\n");
    let mut summary = String::from("imitator,factor,levels,same_setting,cross_setting\n");
    for ((imitator, factor), (cells, grid)) in tasks.iter().zip(results) {
        match cells {
            Some(c) => all_cells.extend(c),
            None => notes.push_str(&format!("{imitator},{factor},fewer than 3 levels; no correlation\n")),
        }
        let (same, cross) = grid
            .diagonal_means()
            .map_or((String::new(), String::new()), |(s, c)| (s.to_string(), c.to_string()));
        summary.push_str(&format!(
            "{imitator},{factor},{},{same},{cross}\n",
            grid.values.row_labels.len()
        ));
        if !grid.values.row_labels.is_empty() {
            outputs.matrix(&format!("eda/overlap/{imitator}_{factor}"), &grid.values, config.format)?;
        }
    }
    outputs.text("eda/correlations.csv", &correlations_csv(&all_cells))?;
    outputs.text("eda/overlap_summary.csv", &summary)?;
    outputs.text("eda/notes.csv", &notes)?;
    let inputs = digest_all("data", &config.data, &dict_files)?;
    finish(Command::Eda, config, root, inputs, outputs, Vec::new())
}

/// Applies one row order, taken from `key`, to every matrix.
fn sort_rows_like(key: &Matrix, others: &[&Matrix]) -> Vec<Matrix> {
    let order = key.row_order_by_mean(false);
    others.iter().map(|m| m.select_rows(&order)).collect()
}

pub fn report(config: &RunConfig) -> Result<RunManifest, CliError> {
    let root = &config.out;
    let records = load_baseline(root)?;
    let mut inputs = vec![PathBuf::from(BASELINE_FILE)];
    let [far, frr, hter] = baseline_matrices(&records);
    let attack = if root.join(ATTACK_FILE).exists() {
        inputs.push(PathBuf::from(ATTACK_FILE));
        Some(load_attack_report(root)?)
    } else {
        None
    };

    clear(root, &["report"])?;
    let mut outputs = Outputs::new(root);
    let sorted = sort_rows_like(&hter, &[&far, &frr, &hter]);
    for (name, m) in ["far", "frr", "hter"].iter().zip(&sorted) {
        outputs.matrix(&format!("report/baseline_{name}"), m, config.format)?;
        outputs.text(format!("report/baseline_{name}_pct.csv"), &m.to_percent_csv()?)?;
    }
    if let Some(report) = &attack {
        let [zero_far, dict_far, zero_hter, dict_hter] = heatmaps(report);
        let sorted = sort_rows_like(&dict_hter, &[&zero_far, &dict_far, &zero_hter, &dict_hter]);
        for (name, m) in ["zero_far", "dict_far", "zero_hter", "dict_hter"].iter().zip(&sorted) {
            outputs.matrix(&format!("report/attack_{name}"), m, config.format)?;
            outputs.text(format!("report/attack_{name}_pct.csv"), &m.to_percent_csv()?)?;
        }
        if let Some((combo, kind)) = best_cell(report) {
            outputs.matrix("report/best_cell_users", &user_matrix(report, combo, kind), config.format)?;
            outputs.matrix("report/best_cell_entries", &entry_matrix(report, combo, kind), config.format)?;
            outputs.text(
                "report/best_cell_distribution.csv",
                &distribution_csv(report, combo, kind, config.severe_threshold),
            )?;
        }
    }
    let inputs = digest_all("out", root, &inputs)?;
    finish(Command::Report, config, root, inputs, outputs, Vec::new())
}
