use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use drive_irl::eval::{
    evaluate_entries, run_ablation_table, run_experiment, write_report_csv, EvalReport, Method, MethodSummary,
    ModelingMode, SceneRow, Split, VehicleSummary,
};
use drive_irl::features::NormalizationConstants;
use drive_irl::ingest::{read_store, Dataset};
use drive_irl::irl::{candidate_distribution, ModelFile};
use drive_irl::sim::EnvMode;
use drive_irl::Error;
use log::{info, warn};
use serde::Serialize;

use super::select_vehicles;
use super::train::load_buffer;
use crate::config::RunConfig;
use crate::output::{write_atomic, write_json};
use crate::EvalArgs;

pub const TABLE_FILE: &str = "table.json";
pub const PROBABILITIES_FILE: &str = "probabilities.csv";

#[derive(Debug, Serialize)]
struct Summary<'a> {
    seed: u64,
    config_hash: String,
    mode: ModelingMode,
    env_mode: EnvMode,
    use_interaction_feature: bool,
    methods: &'a BTreeMap<Method, MethodSummary>,
    vehicles: &'a [VehicleSummary],
    warnings: &'a [String],
}

#[derive(Debug, Serialize)]
struct TableFile<'a> {
    seed: u64,
    config_hash: String,
    mode: ModelingMode,
    rows: &'a BTreeMap<String, MethodSummary>,
}

fn write_report(dir: &Path, stem: &str, report: &EvalReport, cfg: &RunConfig) -> anyhow::Result<()> {
    write_atomic(&dir.join(format!("{stem}_rows.csv")), |buf| write_report_csv(buf, report))?;
    write_json(
        &dir.join(format!("{stem}_summary.json")),
        &Summary {
            seed: cfg.seed,
            config_hash: cfg.hash(),
            mode: report.mode,
            env_mode: report.env_mode,
            use_interaction_feature: report.use_interaction_feature,
            methods: &report.methods,
            vehicles: &report.vehicles,
            warnings: &report.warnings,
        },
    )
}

pub fn run(args: EvalArgs, mut cfg: RunConfig) -> anyhow::Result<()> {
    if let Some(m) = args.env_mode {
        cfg.env.mode = m;
    }
    if let Some(m) = args.mode {
        cfg.eval.mode = m;
    }
    if args.ablate_interaction_feature {
        cfg.eval.use_interaction_feature = false;
    }
    for b in &args.baseline {
        let m = Method::from(*b);
        if !cfg.eval.baselines.contains(&m) {
            cfg.eval.baselines.push(m);
        }
    }
    if args.vehicles.is_some() {
        cfg.vehicles = args.vehicles.clone();
    }
    if args.max_vehicles.is_some() {
        cfg.max_vehicles = args.max_vehicles;
    }
    cfg.validate()?;
    std::fs::create_dir_all(&args.out_dir).map_err(Error::from)?;

    match (&args.model, &args.store) {
        (Some(model), _) => eval_model(model, &args, &cfg),
        (None, Some(store)) => {
            let dataset = read_store(store).with_context(|| {
                format!("reading track store {} (create it with `drive-irl ingest`)", store.display())
            })?;
            eval_store(&dataset, &args.out_dir, &cfg, args.table)
        }
        (None, None) => Err(Error::Config("either --model or --store is required".into()).into()),
    }
}

/// Trains and scores from a track store; `table` runs both ablations too.
pub fn eval_store(dataset: &Dataset, out_dir: &Path, cfg: &RunConfig, table: bool) -> anyhow::Result<()> {
    let vehicles = select_vehicles(dataset, cfg, &cfg.windows())?;
    let ecfg = cfg.eval_config();
    info!("evaluating {} vehicles", vehicles.len());
    if table {
        let t = run_ablation_table(&ecfg, dataset, &vehicles)?;
        let mut seen = std::collections::BTreeSet::new();
        for w in t.reports.values().flat_map(|r| &r.warnings) {
            if seen.insert(w) {
                warn!("{w}");
            }
        }
        for (name, report) in &t.reports {
            write_report(out_dir, name, report, cfg)?;
        }
        write_json(
            &out_dir.join(TABLE_FILE),
            &TableFile { seed: cfg.seed, config_hash: cfg.hash(), mode: cfg.eval.mode, rows: &t.rows },
        )?;
        for (name, row) in &t.rows {
            println!("{name:<32} test HL {:8.3} m", row.test_human_likeness);
        }
    } else {
        let report = run_experiment(&ecfg, dataset, &vehicles)?;
        for w in &report.warnings {
            warn!("{w}");
        }
        write_report(out_dir, "eval", &report, cfg)?;
        for (m, row) in &report.methods {
            println!("{:<32} test HL {:8.3} m", m.as_str(), row.test_human_likeness);
        }
    }
    Ok(())
}

fn eval_model(model_path: &Path, args: &EvalArgs, cfg: &RunConfig) -> anyhow::Result<()> {
    let model = ModelFile::load(model_path).with_context(|| format!("loading model {}", model_path.display()))?;
    let table = args.buffer.as_deref().expect("clap requires --buffer with --model");
    let (buffer, meta, sidecar) = load_buffer(table)?;
    let norm = match &args.norm {
        Some(p) => NormalizationConstants::load(p).with_context(|| format!("reading normalization {}", p.display()))?,
        None => sidecar,
    };
    model.check_normalization(&norm).context("refusing to evaluate")?;
    if model.env_mode != meta.env_mode {
        return Err(Error::Config(format!(
            "model was trained under {} but the buffer was sampled under {}",
            model.env_mode, meta.env_mode
        ))
        .into());
    }
    if args.env_mode.is_some_and(|m| m != meta.env_mode) {
        return Err(Error::Config(format!(
            "buffer was sampled under {}; resample it to evaluate another environment mode",
            meta.env_mode
        ))
        .into());
    }

    let w = model.reward_weights();
    let partition = model.hyperparameters.partition;
    let method = match model.metadata.get("modeling_mode").map(String::as_str) {
        Some("general") => Method::General,
        _ => Method::Personalized,
    };
    let normalized = buffer.normalized(&norm);
    let (train, test) = normalized.entries.split_at(meta.train_scenes);
    let tr = evaluate_entries(&w, train, partition)?;
    let te = evaluate_entries(&w, test, partition)?;

    let mean = |xs: &[(f64, f64)], f: fn(&(f64, f64)) -> f64| xs.iter().map(f).sum::<f64>() / xs.len().max(1) as f64;
    let summary = VehicleSummary {
        vehicle_id: meta.vehicle_id,
        method,
        train_scenes: tr.len(),
        test_scenes: te.len(),
        train_human_likeness: (!tr.is_empty()).then(|| mean(&tr, |p| p.0)),
        train_log_likelihood: (!tr.is_empty()).then(|| mean(&tr, |p| p.1)),
        test_human_likeness: if te.is_empty() { f64::NAN } else { mean(&te, |p| p.0) },
    };
    let rows = train
        .iter()
        .zip(&tr)
        .map(|(e, r)| (e, r, Split::Train))
        .chain(test.iter().zip(&te).map(|(e, r)| (e, r, Split::Test)))
        .map(|(e, r, split)| SceneRow {
            vehicle_id: meta.vehicle_id,
            scene_id: e.scene_id.clone(),
            split,
            method,
            env_mode: meta.env_mode,
            human_likeness: r.0,
        })
        .collect();
    let report = EvalReport {
        mode: if method == Method::General { ModelingMode::General } else { ModelingMode::Personalized },
        env_mode: meta.env_mode,
        use_interaction_feature: !w.drops_interaction(),
        seed: cfg.seed,
        rows,
        methods: BTreeMap::from([(
            method,
            MethodSummary {
                vehicles: 1,
                train_human_likeness: summary.train_human_likeness,
                train_log_likelihood: summary.train_log_likelihood,
                test_human_likeness: summary.test_human_likeness,
            },
        )]),
        vehicles: vec![summary],
        warnings: vec![],
    };
    write_report(&args.out_dir, "eval", &report, cfg)?;

    if args.dump_probabilities {
        write_atomic(&args.out_dir.join(PROBABILITIES_FILE), |buf| {
            let mut wtr = csv::Writer::from_writer(buf);
            wtr.write_record(["scene_id", "candidate_id", "probability", "end_x", "end_y"])?;
            for e in &normalized.entries {
                let p = candidate_distribution(&w, e, partition);
                for (i, (pi, end)) in p.iter().zip(&e.candidate_endpoints).enumerate() {
                    wtr.write_record([
                        e.scene_id.clone(),
                        i.to_string(),
                        format!("{pi:?}"),
                        format!("{:?}", end.0),
                        format!("{:?}", end.1),
                    ])?;
                }
            }
            wtr.flush()?;
            Ok(())
        })?;
    }
    println!("{:<32} test HL {:8.3} m", method.as_str(), report.vehicles[0].test_human_likeness);
    Ok(())
}
