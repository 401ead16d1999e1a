//! Command-line workflows: `synth`, `ingest`, `train`, `attack`, `eda` and
//! `report`, each driven by a [`RunConfig`] and leaving a run manifest.
//!
//! Output layout under the output root:
//!
//! ```text
//! ingest/    normalized recordings, feature matrices, recording summary
//! models/    one JSON model per (user, combo, kind)
//! train/     baseline.json, cells.csv, far/frr/hter grids, failures.csv
//! attack/    report.json, long.csv, summary.csv, entries.csv, best_cell.csv,
//!            distribution.csv
//! eda/       correlations.csv, overlap_summary.csv, overlap/<imitator>_<factor>.csv
//! report/    sorted grids and heatmaps, CSV plus SVG with `--format svg`
//! manifests/ <command>.json
//! ```
//!
//! `synth` writes its corpus and manifest under the data root instead.

pub mod config;
pub mod manifest;
pub mod stages;

use std::fmt;
use std::str::FromStr;

pub use config::{Overrides, RunConfig};
pub use manifest::RunManifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{} cell(s) failed:\n{}", .0.len(), .0.join("\n"))]
    Partial(Vec<String>),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Partial(_) => 4,
        }
    }
}

impl From<gaitdict::Error> for CliError {
    fn from(e: gaitdict::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Synth,
    Ingest,
    Train,
    Attack,
    Eda,
    Report,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Synth,
        Command::Ingest,
        Command::Train,
        Command::Attack,
        Command::Eda,
        Command::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Ingest => "ingest",
            Command::Train => "train",
            Command::Attack => "attack",
            Command::Eda => "eda",
            Command::Report => "report",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| CliError::Config(format!("unknown command `{s}`")))
    }
}

/// Validates the config and runs one command on a worker pool of
/// `config.jobs` threads. Returns the manifest that was written.
pub fn run(command: Command, config: &RunConfig) -> Result<RunManifest, CliError> {
    let mut config = config.clone();
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = config.jobs {
        builder = builder.num_threads(jobs);
    }
    let pool = builder.build().map_err(|e| CliError::Internal(e.to_string()))?;
    pool.install(|| match command {
        Command::Synth => stages::synth(&config),
        Command::Ingest => stages::ingest(&config),
        Command::Train => stages::train(&config),
        Command::Attack => stages::attack(&config),
        Command::Eda => stages::eda(&config),
        Command::Report => stages::report(&config),
    })
}
