use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gaitdict::render::Format;
use gaitdict_cli::config::{parse_classifiers, parse_combos};
use gaitdict_cli::{run, CliError, Command, Overrides, RunConfig};

/// IMU gait authentication baselines and dictionary attacks.
///
/// Settings come from built-in defaults, then the `--config` JSON file, then
/// flags; later layers win. Exit status: 0 success, 1 internal error,
/// 2 configuration error, 3 data error, 4 some cells failed.
#[derive(Debug, Parser)]
#[command(name = "gaitdict", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Generate a synthetic corpus under the data root
    Synth,
    /// Validate and normalize the recordings under the data root
    Ingest,
    /// Train and evaluate one model per (user, combo, classifier)
    Train,
    /// Sweep the dictionary against every trained model
    Attack,
    /// Factor-feature correlations and histogram-overlap grids
    Eda,
    /// Render sorted CSV/SVG summaries of the train and attack outputs
    Report,
}

#[derive(Debug, clap::Args)]
struct Flags {
    /// JSON config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Data root (corpus input; `synth` output)
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Output root
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Sensor combos, e.g. `a,g+m` or `all`
    #[arg(long, global = true)]
    combos: Option<String>,
    /// Classifier kinds, e.g. `knn,svm` or `all`
    #[arg(long, global = true)]
    classifiers: Option<String>,
    /// Window length in seconds
    #[arg(long, global = true)]
    window: Option<f64>,
    /// Window slide in seconds
    #[arg(long, global = true)]
    slide: Option<f64>,
    /// Features kept per sensor
    #[arg(long = "top-k", global = true)]
    top_k: Option<usize>,
    /// Training vectors sampled per impostor
    #[arg(long = "per-impostor", global = true)]
    per_impostor: Option<usize>,
    /// Best-entry FAR at or above which a user is severely impacted
    #[arg(long = "severe-threshold", global = true)]
    severe_threshold: Option<f64>,
    /// Report format
    #[arg(long, global = true, value_parser = ["csv", "svg"])]
    format: Option<String>,
}

fn command(c: &Cmd) -> Command {
    match c {
        Cmd::Synth => Command::Synth,
        Cmd::Ingest => Command::Ingest,
        Cmd::Train => Command::Train,
        Cmd::Attack => Command::Attack,
        Cmd::Eda => Command::Eda,
        Cmd::Report => Command::Report,
    }
}

fn config(flags: Flags) -> Result<RunConfig, CliError> {
    let mut config = match &flags.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let format = flags
        .format
        .map(|f| f.parse::<Format>())
        .transpose()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let combos = flags.combos.as_deref().map(parse_combos).transpose().map_err(CliError::Config)?;
    let classifiers = flags
        .classifiers
        .as_deref()
        .map(parse_classifiers)
        .transpose()
        .map_err(CliError::Config)?;
    config.apply(Overrides {
        data: flags.data,
        out: flags.out,
        seed: flags.seed,
        window: flags.window,
        slide: flags.slide,
        per_impostor: flags.per_impostor,
        top_k: flags.top_k,
        combos,
        classifiers,
        severe_threshold: flags.severe_threshold,
        jobs: flags.jobs,
        format,
    });
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = command(&cli.command);
    let result = config(cli.flags).and_then(|c| run(cmd, &c));
    match result {
        Ok(manifest) => {
            println!("{cmd}: wrote {} file(s)", manifest.outputs.len());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gaitdict {cmd}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
