use std::fs::File;
use std::path::Path;

use anyhow::Context;
use drive_irl::eval::{ModelingMode, GENERAL_POOL_SCENES};
use drive_irl::features::NormalizationConstants;
use drive_irl::irl::{read_buffer_csv, train, write_report_csv, ModelFile, SceneBuffer};
use drive_irl::Error;
use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BufferFiles, BufferMeta};
use crate::config::RunConfig;
use crate::output::{read_json, sibling, write_atomic};
use crate::TrainArgs;

/// Buffer table, its metadata and its normalization sidecar.
pub fn load_buffer(table: &Path) -> anyhow::Result<(SceneBuffer, BufferMeta, NormalizationConstants)> {
    let files = BufferFiles::for_table(table);
    let meta: BufferMeta = read_json(&files.meta)
        .with_context(|| format!("buffer {} has no metadata; rerun `drive-irl sample`", table.display()))?;
    if !meta.complete {
        return Err(Error::Data(format!("buffer {} is incomplete; rerun `drive-irl sample`", table.display())).into());
    }
    let f = File::open(table).map_err(Error::from).with_context(|| format!("opening {}", table.display()))?;
    let buffer = read_buffer_csv(f).with_context(|| format!("reading buffer {}", table.display()))?;
    let ids: Vec<&str> = buffer.entries.iter().map(|e| e.scene_id.as_str()).collect();
    if ids != meta.scene_ids.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::Data(format!("buffer {} does not match its metadata", table.display())).into());
    }
    buffer.validate()?;
    let norm = NormalizationConstants::load(&files.norm)
        .with_context(|| format!("reading normalization {}", files.norm.display()))?;
    Ok((buffer, meta, norm))
}

pub fn run(args: TrainArgs, mut cfg: RunConfig) -> anyhow::Result<()> {
    if let Some(v) = args.lambda {
        cfg.train.lambda = v;
    }
    if let Some(v) = args.alpha {
        cfg.train.alpha = v;
    }
    if let Some(v) = args.epochs {
        cfg.train.epochs = v;
    }
    cfg.validate()?;

    let mut loaded = Vec::new();
    for b in &args.buffer {
        loaded.push(load_buffer(b)?);
    }
    let env_mode = loaded[0].1.env_mode;
    if loaded.iter().any(|l| l.1.env_mode != env_mode) {
        return Err(Error::Config("buffers were sampled under different environment modes".into()).into());
    }

    let (train_buf, norm) = if loaded.len() == 1 {
        let (buffer, meta, norm) = loaded.pop().expect("one buffer");
        let train = SceneBuffer { entries: buffer.entries[..meta.train_scenes].to_vec() };
        (train, norm)
    } else {
        let mut pool: Vec<_> =
            loaded.iter().flat_map(|(b, m, _)| b.entries[..m.train_scenes].iter().cloned()).collect();
        if pool.len() > GENERAL_POOL_SCENES {
            pool.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
            pool.truncate(GENERAL_POOL_SCENES);
        } else if pool.len() < GENERAL_POOL_SCENES {
            warn!("pooled training set holds {} scenes, below {GENERAL_POOL_SCENES}", pool.len());
        }
        let pool = SceneBuffer { entries: pool };
        let norm = NormalizationConstants::fit(pool.vectors())?;
        (pool, norm)
    };

    let tcfg = cfg.train_config(args.ablate_interaction_feature);
    let report = train(&train_buf.normalized(&norm), &tcfg)?;
    info!("objective {:.4} -> {:.4}", report.initial.objective, report.last().objective);

    let mut model = ModelFile::new(&report, norm, env_mode);
    model.metadata.insert("config_hash".into(), cfg.hash());
    model.metadata.insert("training_scenes".into(), train_buf.len().to_string());
    let mode = if args.buffer.len() == 1 { ModelingMode::Personalized } else { ModelingMode::General };
    model.metadata.insert("modeling_mode".into(), mode.to_string());
    write_atomic(&args.out, |buf| {
        buf.extend(model.to_json()?.into_bytes());
        Ok(())
    })?;
    write_atomic(&args.out.with_extension("norm.json"), |buf| {
        buf.extend(norm.to_json()?.into_bytes());
        Ok(())
    })?;
    let report_path = args.report.unwrap_or_else(|| sibling(&args.out, ".report.csv"));
    write_atomic(&report_path, |buf| write_report_csv(buf, &report))
}
