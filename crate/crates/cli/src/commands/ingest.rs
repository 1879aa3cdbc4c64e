use anyhow::Context;
use drive_irl::ingest::{parse_ngsim_csv, smooth_track, write_store, Dataset};
use log::info;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{sibling, write_json};
use crate::IngestArgs;

#[derive(Debug, Serialize)]
struct Rejected {
    vehicle_id: i64,
    reason: String,
}

#[derive(Debug, Serialize)]
struct IngestReport {
    input: String,
    unit: drive_irl::ingest::LengthUnit,
    vehicles_parsed: usize,
    vehicles_kept: usize,
    samples_kept: usize,
    rejected: Vec<Rejected>,
    seed: u64,
    config_hash: String,
}

/// Parses and smooths; tracks failing smoothing are reported and dropped.
pub fn ingest_dataset(input: &std::path::Path, cfg: &RunConfig) -> anyhow::Result<(Dataset, Vec<(i64, String)>)> {
    let raw = parse_ngsim_csv(input, cfg.unit).with_context(|| format!("ingesting {}", input.display()))?;
    let mut kept = Dataset::default();
    let mut rejected = Vec::new();
    for (id, track) in &raw.tracks {
        match smooth_track(track) {
            Ok(t) => {
                kept.tracks.insert(*id, t);
            }
            Err(e) => rejected.push((*id, e.to_string())),
        }
    }
    Ok((kept, rejected))
}

pub fn run(args: IngestArgs, mut cfg: RunConfig) -> anyhow::Result<()> {
    if let Some(u) = args.unit {
        cfg.unit = u;
    }
    let (dataset, rejected) = ingest_dataset(&args.input, &cfg)?;
    let parsed = dataset.len() + rejected.len();
    write_store(&args.output, &dataset).with_context(|| format!("writing {}", args.output.display()))?;
    let report = IngestReport {
        input: args.input.display().to_string(),
        unit: cfg.unit,
        vehicles_parsed: parsed,
        vehicles_kept: dataset.len(),
        samples_kept: dataset.tracks.values().map(|t| t.states.len()).sum(),
        rejected: rejected.into_iter().map(|(vehicle_id, reason)| Rejected { vehicle_id, reason }).collect(),
        seed: cfg.seed,
        config_hash: cfg.hash(),
    };
    let path = args.report.unwrap_or_else(|| sibling(&args.output, ".report.json"));
    write_json(&path, &report)?;
    info!("kept {} of {parsed} vehicles", report.vehicles_kept);
    Ok(())
}
