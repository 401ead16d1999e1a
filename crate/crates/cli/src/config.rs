//! Run configuration: built-in defaults, then a JSON config file, then
//! command-line flags, each layer overriding the previous one.

use std::path::{Path, PathBuf};

use gaitdict::authbench::DEFAULT_PER_IMPOSTOR;
use gaitdict::dictattack::DEFAULT_SEVERE_THRESHOLD;
use gaitdict::features::DEFAULT_TOP_K;
use gaitdict::learners::ClassifierKind;
use gaitdict::render::Format;
use gaitdict::signal::{SensorCombo, DEFAULT_SLIDE_SECS, DEFAULT_WINDOW_SECS};
use gaitdict::synth::SynthConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub window: f64,
    pub slide: f64,
    pub per_impostor: usize,
    pub top_k: usize,
    pub combos: Vec<SensorCombo>,
    pub classifiers: Vec<ClassifierKind>,
    pub severe_threshold: f64,
    /// Worker threads; `None` uses every available core.
    pub jobs: Option<usize>,
    pub format: Format,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: PathBuf::from("data"),
            out: PathBuf::from("out"),
            seed: 0,
            window: DEFAULT_WINDOW_SECS,
            slide: DEFAULT_SLIDE_SECS,
            per_impostor: DEFAULT_PER_IMPOSTOR,
            top_k: DEFAULT_TOP_K,
            combos: SensorCombo::all(),
            classifiers: ClassifierKind::ALL.to_vec(),
            severe_threshold: DEFAULT_SEVERE_THRESHOLD,
            jobs: None,
            format: Format::Csv,
            synth: SynthConfig::default(),
        }
    }
}

/// Flag values; `None` leaves the underlying value alone.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub window: Option<f64>,
    pub slide: Option<f64>,
    pub per_impostor: Option<usize>,
    pub top_k: Option<usize>,
    pub combos: Option<Vec<SensorCombo>>,
    pub classifiers: Option<Vec<ClassifierKind>>,
    pub severe_threshold: Option<f64>,
    pub jobs: Option<usize>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: Overrides) {
        macro_rules! take {
            ($($f:ident),*) => {
                $(if let Some(v) = o.$f { self.$f = v; })*
            };
        }
        take!(data, out, seed, window, slide, per_impostor, top_k, combos, classifiers, severe_threshold, format);
        if o.jobs.is_some() {
            self.jobs = o.jobs;
        }
    }

    /// Checks ranges and puts the combo and classifier filters in canonical
    /// order.
    pub fn validate(&mut self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.window.is_finite() && self.window > 0.0) {
            return bad(format!("window must be positive, got {}", self.window));
        }
        if !(self.slide.is_finite() && self.slide > 0.0) {
            return bad(format!("slide must be positive, got {}", self.slide));
        }
        if self.per_impostor == 0 {
            return bad("per-impostor must be at least 1".into());
        }
        if self.top_k == 0 {
            return bad("top-k must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.severe_threshold) {
            return bad(format!("severe threshold must lie in [0, 1], got {}", self.severe_threshold));
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        self.combos.sort();
        self.combos.dedup();
        self.classifiers.sort();
        self.classifiers.dedup();
        if self.combos.is_empty() {
            return bad("no sensor combos selected".into());
        }
        if self.classifiers.is_empty() {
            return bad("no classifiers selected".into());
        }
        Ok(())
    }

    /// The settings that determine output bytes. Paths and job count are
    /// left out so equal runs in different places produce equal manifests.
    pub fn fingerprint(&self) -> serde_json::Value {
        serde_json::json!({
            "seed": self.seed,
            "window": self.window,
            "slide": self.slide,
            "per_impostor": self.per_impostor,
            "top_k": self.top_k,
            "combos": self.combos,
            "classifiers": self.classifiers,
            "severe_threshold": self.severe_threshold,
            "format": self.format,
        })
    }
}

/// Parses `all` or a comma-separated list such as `a,g+m`.
pub fn parse_combos(s: &str) -> Result<Vec<SensorCombo>, String> {
    if s.trim() == "all" {
        return Ok(SensorCombo::all());
    }
    s.split(',').map(|c| c.trim().parse::<SensorCombo>().map_err(|e| e.to_string())).collect()
}

/// Parses `all` or a comma-separated list such as `knn,svm`.
pub fn parse_classifiers(s: &str) -> Result<Vec<ClassifierKind>, String> {
    if s.trim() == "all" {
        return Ok(ClassifierKind::ALL.to_vec());
    }
    s.split(',').map(|c| c.trim().parse::<ClassifierKind>().map_err(|e| e.to_string())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!((c.window, c.slide, c.per_impostor, c.top_k), (8.0, 4.0, 5, 30));
        assert_eq!(c.combos.len(), 15);
        assert_eq!(c.classifiers.len(), 5);
        assert_eq!(c.severe_threshold, 0.5);
    }

    #[test]
    fn flags_override_file() {
        let mut c: RunConfig = serde_json::from_str(r#"{"seed": 4, "top_k": 10}"#).unwrap();
        c.apply(Overrides {
            seed: Some(9),
            ..Default::default()
        });
        assert_eq!((c.seed, c.top_k), (9, 10));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 4}"#).is_err());
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_combos("all").unwrap().len(), 15);
        assert_eq!(parse_combos("g+a, m").unwrap().len(), 2);
        assert!(parse_combos("q").is_err());
        assert_eq!(parse_classifiers("knn,random_forest").unwrap().len(), 2);
    }

    #[test]
    fn validation() {
        let mut c = RunConfig {
            window: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let mut c = RunConfig {
            combos: vec![],
            ..Default::default()
        };
        assert!(c.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }
}
