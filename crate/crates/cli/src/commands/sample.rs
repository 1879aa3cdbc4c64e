use std::collections::BTreeMap;
use std::fs::File;

use anyhow::Context;
use drive_irl::eval::{split_counts, vehicle_scenes};
use drive_irl::features::NormalizationConstants;
use drive_irl::ingest::{read_store, refit_demonstration, Dataset, Scene};
use drive_irl::irl::{read_buffer_csv, write_buffer_csv, SceneBuffer, SceneEntry};
use drive_irl::sampling::{evaluate_candidate, sample_scenes, SamplingConfig};
use drive_irl::sim::write_trace_jsonl;
use drive_irl::trajectory::{generate_candidates, write_candidates_jsonl};
use drive_irl::Error;
use log::info;
use rayon::prelude::*;

use super::{select_vehicles, BufferFiles, BufferMeta};
use crate::config::RunConfig;
use crate::output::{read_json, write_atomic, write_json};
use crate::SampleArgs;

/// Scenes sampled between checkpoints of a vehicle's buffer.
const CHECKPOINT: usize = 8;

pub fn run(args: SampleArgs, mut cfg: RunConfig) -> anyhow::Result<()> {
    if let Some(m) = args.env_mode {
        cfg.env.mode = m;
    }
    if args.vehicles.is_some() {
        cfg.vehicles = args.vehicles.clone();
    }
    if args.max_vehicles.is_some() {
        cfg.max_vehicles = args.max_vehicles;
    }
    cfg.validate()?;
    let dataset = read_store(&args.store).with_context(|| {
        format!("reading track store {} (create it with `drive-irl ingest`)", args.store.display())
    })?;
    let windows = cfg.windows();
    let vehicles = select_vehicles(&dataset, &cfg, &windows)?;
    std::fs::create_dir_all(&args.out_dir).map_err(Error::from)?;
    let scfg = cfg.sampling_config(cfg.env.mode);

    // Each vehicle's files are written by exactly one worker.
    vehicles
        .par_iter()
        .map(|&v| sample_vehicle(&dataset, v, &cfg, &scfg, &args))
        .collect::<anyhow::Result<Vec<()>>>()?;
    Ok(())
}

fn sample_vehicle(
    dataset: &Dataset,
    vehicle_id: i64,
    cfg: &RunConfig,
    scfg: &SamplingConfig,
    args: &SampleArgs,
) -> anyhow::Result<()> {
    let files = BufferFiles::for_vehicle(&args.out_dir, vehicle_id);
    let all = vehicle_scenes(dataset, vehicle_id, &cfg.windows())?;
    let ecfg = cfg.eval_config();
    let (n_train, n_test) =
        split_counts(all.len(), &ecfg).map_err(|e| Error::Config(format!("vehicle {vehicle_id}: {e}")))?;
    let scenes: Vec<Scene> = all.into_iter().take(n_train + n_test).collect();
    let mut meta = BufferMeta {
        vehicle_id,
        env_mode: cfg.env.mode,
        train_scenes: n_train,
        test_scenes: n_test,
        scene_ids: scenes.iter().map(|s| s.scene_id.clone()).collect(),
        complete: false,
        seed: cfg.seed,
        // Vehicle selection does not change a vehicle's buffer.
        config_hash: RunConfig { vehicles: None, max_vehicles: None, ..cfg.clone() }.hash(),
    };

    if let Some(dump) = &args.dump_scene {
        if let Some(scene) = scenes.iter().find(|s| &s.scene_id == dump) {
            dump_scene(scene, scfg, args)?;
        }
    }

    // Resume from a checkpoint written under the same configuration.
    let mut done: BTreeMap<String, SceneEntry> = BTreeMap::new();
    if files.meta.exists() && files.table.exists() {
        let old: BufferMeta = read_json(&files.meta)?;
        if old.config_hash == meta.config_hash && old.scene_ids == meta.scene_ids {
            if old.complete && files.norm.exists() {
                info!("vehicle {vehicle_id}: buffer complete, nothing to do");
                return Ok(());
            }
            let f = File::open(&files.table).map_err(Error::from)?;
            for e in read_buffer_csv(f).with_context(|| format!("reading {}", files.table.display()))?.entries {
                done.insert(e.scene_id.clone(), e);
            }
        }
    }
    write_json(&files.meta, &meta)?;

    let todo: Vec<Scene> = scenes.iter().filter(|s| !done.contains_key(&s.scene_id)).cloned().collect();
    info!("vehicle {vehicle_id}: {} scenes to sample, {} reused", todo.len(), done.len());
    for chunk in todo.chunks(CHECKPOINT) {
        for e in sample_scenes(chunk, scfg)?.entries {
            done.insert(e.scene_id.clone(), e);
        }
        let ordered = ordered_buffer(&scenes, &done);
        write_atomic(&files.table, |buf| write_buffer_csv(buf, &ordered))?;
    }
    let buffer = ordered_buffer(&scenes, &done);
    if todo.is_empty() {
        write_atomic(&files.table, |buf| write_buffer_csv(buf, &buffer))?;
    }
    let train = SceneBuffer { entries: buffer.entries[..n_train].to_vec() };
    let norm = NormalizationConstants::fit(train.vectors())?;
    write_atomic(&files.norm, |buf| {
        buf.extend(norm.to_json()?.into_bytes());
        Ok(())
    })?;
    meta.complete = true;
    write_json(&files.meta, &meta)?;
    Ok(())
}

fn ordered_buffer(scenes: &[Scene], done: &BTreeMap<String, SceneEntry>) -> SceneBuffer {
    SceneBuffer { entries: scenes.iter().filter_map(|s| done.get(&s.scene_id).cloned()).collect() }
}

fn dump_scene(scene: &Scene, scfg: &SamplingConfig, args: &SampleArgs) -> anyhow::Result<()> {
    let dir = args.out_dir.join(format!("dump_{}", scene.scene_id));
    std::fs::create_dir_all(&dir).map_err(Error::from)?;
    let mut cands = generate_candidates(scene, &scfg.road, &scfg.space)?;
    cands.push(refit_demonstration(scene)?);
    write_atomic(&dir.join("candidates.jsonl"), |buf| write_candidates_jsonl(buf, &cands))?;
    for (i, c) in cands.iter().enumerate() {
        let (_, _, r) = evaluate_candidate(scene, c, scfg)?;
        let name = if i + 1 == cands.len() { "trace_demo.jsonl".to_string() } else { format!("trace_{i:02}.jsonl") };
        write_atomic(&dir.join(name), |buf| write_trace_jsonl(buf, &r))?;
    }
    Ok(())
}
