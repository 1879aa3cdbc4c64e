mod eval;
mod ingest;
mod run;
mod sample;
mod synth;
mod train;

use std::path::{Path, PathBuf};

use drive_irl::ingest::{Dataset, SceneWindows};
use drive_irl::Error;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::{Cli, Command, GlobalArgs};

pub fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = RunConfig::load(cli.global.config.as_deref())?;
    apply_global(&mut cfg, &cli.global);
    match cli.command {
        Command::Ingest(a) => ingest::run(a, cfg),
        Command::Sample(a) => sample::run(a, cfg),
        Command::Train(a) => train::run(a, cfg),
        Command::Eval(a) => eval::run(a, cfg),
        Command::Run(a) => run::run(a, cfg),
        Command::Synth(a) => synth::run(a, cfg),
    }
}

fn apply_global(cfg: &mut RunConfig, g: &GlobalArgs) {
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
}

/// Vehicles whose track holds at least two scenes, in id order. When no
/// explicit list is given and `max_vehicles` caps the count, a seeded random
/// subset is drawn.
pub fn select_vehicles(dataset: &Dataset, cfg: &RunConfig, windows: &SceneWindows) -> Result<Vec<i64>, Error> {
    if let Some(list) = &cfg.vehicles {
        for id in list {
            if dataset.get(*id).is_none() {
                return Err(Error::Config(format!("vehicle {id} is not in the store")));
            }
        }
        return Ok(list.clone());
    }
    let need = 2 * (windows.horizon / drive_irl::DT).round() as usize + 1;
    let mut ids: Vec<i64> =
        dataset.tracks.values().filter(|t| t.states.len() >= need).map(|t| t.vehicle_id).collect();
    if let Some(max) = cfg.max_vehicles {
        if ids.len() > max {
            ids.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
            ids.truncate(max);
            ids.sort_unstable();
        }
    }
    if ids.is_empty() {
        return Err(Error::Data("no vehicle track is long enough for two scenes".into()));
    }
    Ok(ids)
}

/// Sidecar files written next to a buffer table.
pub struct BufferFiles {
    pub table: PathBuf,
    pub norm: PathBuf,
    pub meta: PathBuf,
}

impl BufferFiles {
    pub fn for_table(table: &Path) -> Self {
        Self {
            table: table.to_path_buf(),
            norm: table.with_extension("norm.json"),
            meta: table.with_extension("meta.json"),
        }
    }

    pub fn for_vehicle(dir: &Path, vehicle_id: i64) -> Self {
        Self::for_table(&dir.join(format!("buffer_{vehicle_id}.csv")))
    }
}

/// Bookkeeping of one vehicle's buffer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferMeta {
    pub vehicle_id: i64,
    pub env_mode: drive_irl::EnvMode,
    pub train_scenes: usize,
    pub test_scenes: usize,
    /// All scene ids in order; the first `train_scenes` are the training split.
    pub scene_ids: Vec<String>,
    pub complete: bool,
    pub seed: u64,
    pub config_hash: String,
}
