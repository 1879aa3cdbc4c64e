//! `drive-irl`: ingest trajectories, sample candidate buffers, train reward
//! models and evaluate them against baselines.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use drive_irl::eval::{Method, ModelingMode};
use drive_irl::ingest::LengthUnit;
use drive_irl::sim::EnvMode;

#[derive(Debug, Parser)]
#[command(name = "drive-irl", version, about = "Learn highway driving rewards from trajectory data")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and smooth an NGSIM CSV into the canonical track store.
    Ingest(IngestArgs),
    /// Generate, roll out and featurize candidates for every scene.
    Sample(SampleArgs),
    /// Fit reward weights on one or more sampled buffers.
    Train(TrainArgs),
    /// Score a trained model, or train and score in one go from a store.
    Eval(EvalArgs),
    /// Ingest, then run the full model, both ablations and the baselines.
    Run(RunArgs),
    /// Write a simulated recording in NGSIM layout.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output store; `.jsonl` selects line-delimited JSON, anything else CSV.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub unit: Option<LengthUnit>,
    /// Ingestion report (JSON); defaults to `<output>.report.json`.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub vehicles: Option<Vec<i64>>,
    #[arg(long)]
    pub max_vehicles: Option<usize>,
    #[arg(long)]
    pub env_mode: Option<EnvMode>,
    /// Also dump candidates and rollout traces of this scene id.
    #[arg(long)]
    pub dump_scene: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// One buffer trains a personalized model; several are pooled.
    #[arg(long, num_args = 1.., required = true)]
    pub buffer: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch report; defaults to `<out>.report.csv`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Hold the interaction weight at zero.
    #[arg(long)]
    pub ablate_interaction_feature: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Trained model; requires `--buffer`.
    #[arg(long, requires = "buffer", conflicts_with_all = ["store", "ablate_interaction_feature", "table"])]
    pub model: Option<PathBuf>,
    #[arg(long, requires = "model")]
    pub buffer: Option<PathBuf>,
    /// Normalization sidecar; defaults to the buffer's.
    #[arg(long, requires = "model")]
    pub norm: Option<PathBuf>,
    /// Track store to train and evaluate from.
    #[arg(long, required_unless_present = "model")]
    pub store: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub env_mode: Option<EnvMode>,
    #[arg(long)]
    pub mode: Option<ModelingMode>,
    #[arg(long)]
    pub ablate_interaction_feature: bool,
    /// Baselines to score on the same test scenes.
    #[arg(long, value_enum)]
    pub baseline: Vec<BaselineArg>,
    /// Run the full model and both ablations and write the comparison table.
    #[arg(long)]
    pub table: bool,
    #[arg(long, value_delimiter = ',')]
    pub vehicles: Option<Vec<i64>>,
    #[arg(long)]
    pub max_vehicles: Option<usize>,
    /// Write per-candidate probabilities (model evaluation only).
    #[arg(long, requires = "model")]
    pub dump_probabilities: bool,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum BaselineArg {
    #[value(name = "idm_mobil")]
    IdmMobil,
    #[value(name = "const_vel")]
    ConstVel,
}

impl From<BaselineArg> for Method {
    fn from(b: BaselineArg) -> Self {
        match b {
            BaselineArg::IdmMobil => Method::IdmMobil,
            BaselineArg::ConstVel => Method::ConstVel,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub unit: Option<LengthUnit>,
    #[arg(long)]
    pub mode: Option<ModelingMode>,
    #[arg(long, value_delimiter = ',')]
    pub vehicles: Option<Vec<i64>>,
    #[arg(long)]
    pub max_vehicles: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub lanes: u8,
    #[arg(long, default_value_t = 3)]
    pub vehicles_per_lane: usize,
    /// Seconds of recording.
    #[arg(long, default_value_t = 60.0)]
    pub duration: f64,
    #[arg(long)]
    pub unit: Option<LengthUnit>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(output::exit_code(&e))
        }
    }
}
