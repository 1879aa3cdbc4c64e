use drive_irl::eval::Method;
use drive_irl::ingest::write_store;
use log::{info, warn};

use super::eval::eval_store;
use super::ingest::ingest_dataset;
use crate::config::RunConfig;
use crate::output::write_json;
use crate::RunArgs;

pub const STORE_FILE: &str = "tracks.csv";

pub fn run(args: RunArgs, mut cfg: RunConfig) -> anyhow::Result<()> {
    if let Some(u) = args.unit {
        cfg.unit = u;
    }
    if let Some(m) = args.mode {
        cfg.eval.mode = m;
    }
    if args.vehicles.is_some() {
        cfg.vehicles = args.vehicles.clone();
    }
    if args.max_vehicles.is_some() {
        cfg.max_vehicles = args.max_vehicles;
    }
    for m in [Method::IdmMobil, Method::ConstVel] {
        if !cfg.eval.baselines.contains(&m) {
            cfg.eval.baselines.push(m);
        }
    }
    cfg.validate()?;
    std::fs::create_dir_all(&args.out_dir).map_err(drive_irl::Error::from)?;

    let (dataset, rejected) = ingest_dataset(&args.input, &cfg)?;
    for (id, reason) in &rejected {
        warn!("vehicle {id} dropped: {reason}");
    }
    write_store(args.out_dir.join(STORE_FILE), &dataset)?;
    write_json(&args.out_dir.join("config.json"), &cfg)?;
    info!("{} vehicles ingested", dataset.len());
    eval_store(&dataset, &args.out_dir, &cfg, true)
}
