use std::collections::BTreeMap;
use std::io::Write;

use log::info;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{constant_velocity_predict, displacement, human_likeness, idm_mobil_predict};
use crate::error::{Error, Result};
use crate::features::NormalizationConstants;
use crate::ingest::{segment_scenes, Dataset, Scene, SceneWindows};
use crate::irl::{
    candidate_distribution, scene_log_likelihood, train, Partition, RewardWeights, SceneBuffer, SceneEntry,
    TrainConfig,
};
use crate::sampling::{sample_scenes, SamplingConfig};
use crate::sim::{EnvConfig, EnvMode, IdmParams, MobilParams};

/// Scenes in the pooled training set of the general model.
pub const GENERAL_POOL_SCENES: usize = 150;
/// Vehicles the pooled training set is meant to cover.
pub const GENERAL_POOL_VEHICLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelingMode {
    #[default]
    Personalized,
    General,
}

impl ModelingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelingMode::Personalized => "personalized",
            ModelingMode::General => "general",
        }
    }
}

impl std::fmt::Display for ModelingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "personalized" => Ok(ModelingMode::Personalized),
            "general" => Ok(ModelingMode::General),
            other => Err(Error::Config(format!("unknown modeling mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Personalized,
    General,
    IdmMobil,
    ConstVel,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Personalized => "personalized",
            Method::General => "general",
            Method::IdmMobil => "idm_mobil",
            Method::ConstVel => "const_vel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub mode: ModelingMode,
    pub env_mode: EnvMode,
    pub use_interaction_feature: bool,
    pub train_scenes: usize,
    pub test_scenes: usize,
    pub baselines: Vec<Method>,
    pub train: TrainConfig,
    pub sampling: SamplingConfig,
    pub windows: SceneWindows,
    pub baseline_idm: IdmParams,
    pub baseline_mobil: MobilParams,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            mode: ModelingMode::Personalized,
            env_mode: EnvMode::ReactiveReplay,
            use_interaction_feature: true,
            train_scenes: 35,
            test_scenes: 15,
            baselines: vec![],
            train: TrainConfig::default(),
            sampling: SamplingConfig::default(),
            windows: SceneWindows::default(),
            baseline_idm: IdmParams::baseline(0.0),
            baseline_mobil: MobilParams::default(),
            seed: 0,
        }
    }
}

impl EvalConfig {
    fn sampling(&self) -> SamplingConfig {
        SamplingConfig { env: EnvConfig { mode: self.env_mode, ..self.sampling.env }, ..self.sampling.clone() }
    }

    fn train_config(&self) -> TrainConfig {
        TrainConfig { drop_interaction: !self.use_interaction_feature, seed: self.seed, ..self.train }
    }
}

/// Train/test scene counts for a vehicle with `n` scenes.
///
/// The configured counts are used when enough scenes exist; otherwise the
/// same proportion is applied, keeping at least one scene on each side.
pub fn split_counts(n: usize, cfg: &EvalConfig) -> Result<(usize, usize)> {
    if n < 2 {
        return Err(Error::Config(format!("{n} scenes cannot be split into train and test")));
    }
    let want = cfg.train_scenes + cfg.test_scenes;
    if n >= want {
        return Ok((cfg.train_scenes, cfg.test_scenes));
    }
    let share = cfg.train_scenes as f64 / want as f64;
    let train = ((n as f64 * share).round() as usize).clamp(1, n - 1);
    Ok((train, n - train))
}

pub fn vehicle_scenes(dataset: &Dataset, vehicle_id: i64, windows: &SceneWindows) -> Result<Vec<Scene>> {
    let track = dataset
        .get(vehicle_id)
        .ok_or_else(|| Error::Config(format!("vehicle {vehicle_id} is not in the dataset")))?;
    Ok(segment_scenes(track, dataset, windows))
}

/// Per-scene human likeness and log-likelihood of normalized entries.
pub fn evaluate_entries(w: &RewardWeights, entries: &[SceneEntry], partition: Partition) -> Result<Vec<(f64, f64)>> {
    entries
        .iter()
        .map(|e| {
            let p = candidate_distribution(w, e, partition);
            Ok((human_likeness(&p, &e.candidate_endpoints, e.gt_endpoint)?, scene_log_likelihood(w, e, partition)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRow {
    pub vehicle_id: i64,
    pub scene_id: String,
    pub split: Split,
    pub method: Method,
    pub env_mode: EnvMode,
    pub human_likeness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSummary {
    pub vehicle_id: i64,
    pub method: Method,
    pub train_scenes: usize,
    pub test_scenes: usize,
    pub train_human_likeness: Option<f64>,
    pub train_log_likelihood: Option<f64>,
    pub test_human_likeness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub vehicles: usize,
    pub train_human_likeness: Option<f64>,
    pub train_log_likelihood: Option<f64>,
    pub test_human_likeness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: ModelingMode,
    pub env_mode: EnvMode,
    pub use_interaction_feature: bool,
    pub seed: u64,
    pub rows: Vec<SceneRow>,
    pub vehicles: Vec<VehicleSummary>,
    /// Means of the per-vehicle means.
    pub methods: BTreeMap<Method, MethodSummary>,
    pub warnings: Vec<String>,
}

fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = v.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn summarize(vehicles: &[VehicleSummary]) -> BTreeMap<Method, MethodSummary> {
    let mut by: BTreeMap<Method, Vec<&VehicleSummary>> = BTreeMap::new();
    for v in vehicles {
        by.entry(v.method).or_default().push(v);
    }
    by.into_iter()
        .map(|(m, vs)| {
            let opt = |f: fn(&VehicleSummary) -> Option<f64>| {
                let xs: Vec<f64> = vs.iter().filter_map(|v| f(v)).collect();
                (!xs.is_empty()).then(|| mean(xs))
            };
            let s = MethodSummary {
                vehicles: vs.len(),
                train_human_likeness: opt(|v| v.train_human_likeness),
                train_log_likelihood: opt(|v| v.train_log_likelihood),
                test_human_likeness: mean(vs.iter().map(|v| v.test_human_likeness)),
            };
            (m, s)
        })
        .collect()
}

struct VehicleData {
    vehicle_id: i64,
    scenes: Vec<Scene>,
    buffer: SceneBuffer,
    n_train: usize,
}

fn rows_for(
    vd: &VehicleData,
    method: Method,
    env_mode: EnvMode,
    split: Split,
    hls: &[f64],
) -> Vec<SceneRow> {
    let offset = if split == Split::Train { 0 } else { vd.n_train };
    hls.iter()
        .enumerate()
        .map(|(i, &hl)| SceneRow {
            vehicle_id: vd.vehicle_id,
            scene_id: vd.scenes[offset + i].scene_id.clone(),
            split,
            method,
            env_mode,
            human_likeness: hl,
        })
        .collect()
}

struct Learned {
    rows: Vec<SceneRow>,
    summary: VehicleSummary,
}

fn score_learned(
    vd: &VehicleData,
    method: Method,
    w: &RewardWeights,
    c: &NormalizationConstants,
    cfg: &EvalConfig,
) -> Result<Learned> {
    let norm = vd.buffer.normalized(c);
    let (train, test) = norm.entries.split_at(vd.n_train);
    let partition = cfg.train.partition;
    let tr = evaluate_entries(w, train, partition)?;
    let te = evaluate_entries(w, test, partition)?;
    let tr_hl: Vec<f64> = tr.iter().map(|p| p.0).collect();
    let te_hl: Vec<f64> = te.iter().map(|p| p.0).collect();
    let mut rows = rows_for(vd, method, cfg.env_mode, Split::Train, &tr_hl);
    rows.extend(rows_for(vd, method, cfg.env_mode, Split::Test, &te_hl));
    Ok(Learned {
        rows,
        summary: VehicleSummary {
            vehicle_id: vd.vehicle_id,
            method,
            train_scenes: train.len(),
            test_scenes: test.len(),
            train_human_likeness: Some(mean(tr_hl.iter().copied())),
            train_log_likelihood: Some(mean(tr.iter().map(|p| p.1))),
            test_human_likeness: mean(te_hl.iter().copied()),
        },
    })
}

fn score_baseline(vd: &VehicleData, method: Method, cfg: &EvalConfig) -> Result<Learned> {
    let test = &vd.scenes[vd.n_train..];
    let hls = test
        .iter()
        .map(|s| {
            let end = match method {
                Method::ConstVel => *constant_velocity_predict(s).last().expect("non-empty prediction"),
                Method::IdmMobil => *idm_mobil_predict(s, &cfg.sampling.road, &cfg.baseline_idm, &cfg.baseline_mobil)?
                    .last()
                    .expect("non-empty prediction"),
                other => return Err(Error::Config(format!("{} is not a baseline", other.as_str()))),
            };
            Ok(displacement((end.x, end.y), s.ground_truth_end()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Learned {
        rows: rows_for(vd, method, cfg.env_mode, Split::Test, &hls),
        summary: VehicleSummary {
            vehicle_id: vd.vehicle_id,
            method,
            train_scenes: 0,
            test_scenes: hls.len(),
            train_human_likeness: None,
            train_log_likelihood: None,
            test_human_likeness: mean(hls.iter().copied()),
        },
    })
}

fn prepare(dataset: &Dataset, vehicle_id: i64, cfg: &EvalConfig, sample: bool) -> Result<VehicleData> {
    let all = vehicle_scenes(dataset, vehicle_id, &cfg.windows)?;
    let (n_train, n_test) = split_counts(all.len(), cfg)
        .map_err(|e| Error::Config(format!("vehicle {vehicle_id}: {e}")))?;
    let scenes: Vec<Scene> = all.into_iter().take(n_train + n_test).collect();
    let buffer = if sample { sample_scenes(&scenes, &cfg.sampling())? } else { SceneBuffer::default() };
    Ok(VehicleData { vehicle_id, scenes, buffer, n_train })
}

fn split_warnings(data: &[VehicleData], cfg: &EvalConfig) -> Vec<String> {
    data.iter()
        .filter(|vd| vd.scenes.len() < cfg.train_scenes + cfg.test_scenes)
        .map(|vd| {
            format!(
                "vehicle {}: {} scenes available, split {}/{}",
                vd.vehicle_id,
                vd.scenes.len(),
                vd.n_train,
                vd.scenes.len() - vd.n_train
            )
        })
        .collect()
}

fn assemble(cfg: &EvalConfig, results: Vec<Learned>, warnings: Vec<String>) -> EvalReport {
    for w in &warnings {
        info!("{w}");
    }
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for r in results {
        rows.extend(r.rows);
        summaries.push(r.summary);
    }
    EvalReport {
        mode: cfg.mode,
        env_mode: cfg.env_mode,
        use_interaction_feature: cfg.use_interaction_feature,
        seed: cfg.seed,
        rows,
        methods: summarize(&summaries),
        vehicles: summaries,
        warnings,
    }
}

/// Scores only `cfg.baselines` on the test scenes; nothing is sampled or trained.
pub fn run_baselines(cfg: &EvalConfig, dataset: &Dataset, vehicles: &[i64]) -> Result<EvalReport> {
    if vehicles.is_empty() {
        return Err(Error::Config("no vehicles selected for evaluation".into()));
    }
    let data = vehicles.par_iter().map(|&v| prepare(dataset, v, cfg, false)).collect::<Result<Vec<_>>>()?;
    let warnings = split_warnings(&data, cfg);
    let mut results = Vec::new();
    for &b in &cfg.baselines {
        results.extend(data.par_iter().map(|vd| score_baseline(vd, b, cfg)).collect::<Result<Vec<_>>>()?);
    }
    Ok(assemble(cfg, results, warnings))
}

/// Trains and scores the configured model and baselines for `vehicles`.
///
/// Scenes are taken in time order: the first ones train, the following
/// ones test. Vehicles are processed in parallel and reported in input order.
pub fn run_experiment(cfg: &EvalConfig, dataset: &Dataset, vehicles: &[i64]) -> Result<EvalReport> {
    if vehicles.is_empty() {
        return Err(Error::Config("no vehicles selected for evaluation".into()));
    }
    let data = vehicles.par_iter().map(|&v| prepare(dataset, v, cfg, true)).collect::<Result<Vec<_>>>()?;
    let mut warnings = split_warnings(&data, cfg);
    let tcfg = cfg.train_config();

    let mut results: Vec<Learned> = Vec::new();
    match cfg.mode {
        ModelingMode::Personalized => {
            let learned = data
                .par_iter()
                .map(|vd| {
                    let train_buf = SceneBuffer { entries: vd.buffer.entries[..vd.n_train].to_vec() };
                    let (norm, c) = train_buf.normalize()?;
                    let report = train(&norm, &tcfg)?;
                    score_learned(vd, Method::Personalized, &report.weights, &c, cfg)
                })
                .collect::<Result<Vec<_>>>()?;
            results.extend(learned);
        }
        ModelingMode::General => {
            if data.len() < GENERAL_POOL_VEHICLES {
                warnings.push(format!(
                    "general pool covers {} vehicles, below the intended {GENERAL_POOL_VEHICLES}",
                    data.len()
                ));
            }
            let mut pool: Vec<SceneEntry> =
                data.iter().flat_map(|vd| vd.buffer.entries[..vd.n_train].iter().cloned()).collect();
            if pool.len() > GENERAL_POOL_SCENES {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                pool.shuffle(&mut rng);
                pool.truncate(GENERAL_POOL_SCENES);
            } else if pool.len() < GENERAL_POOL_SCENES {
                warnings.push(format!("general pool holds {} scenes, below {GENERAL_POOL_SCENES}", pool.len()));
            }
            let (norm, c) = SceneBuffer { entries: pool }.normalize()?;
            let report = train(&norm, &tcfg)?;
            for vd in &data {
                results.push(score_learned(vd, Method::General, &report.weights, &c, cfg)?);
            }
        }
    }
    for &b in &cfg.baselines {
        let scored = data.par_iter().map(|vd| score_baseline(vd, b, cfg)).collect::<Result<Vec<_>>>()?;
        results.extend(scored);
    }
    Ok(assemble(cfg, results, warnings))
}

/// The full model, its two interaction ablations and any baselines, keyed by
/// row name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub rows: BTreeMap<String, MethodSummary>,
    pub reports: BTreeMap<String, EvalReport>,
}

pub fn run_ablation_table(cfg: &EvalConfig, dataset: &Dataset, vehicles: &[i64]) -> Result<AblationTable> {
    let variants = [
        ("proposed", EvalConfig { use_interaction_feature: true, env_mode: EnvMode::ReactiveReplay, ..cfg.clone() }),
        (
            "without_interaction_awareness",
            EvalConfig { use_interaction_feature: false, env_mode: EnvMode::ReactiveReplay, ..cfg.clone() },
        ),
        (
            "without_reactive_response",
            EvalConfig { use_interaction_feature: true, env_mode: EnvMode::FixedReplay, ..cfg.clone() },
        ),
    ];
    let method = match cfg.mode {
        ModelingMode::Personalized => Method::Personalized,
        ModelingMode::General => Method::General,
    };
    let mut table = AblationTable { rows: BTreeMap::new(), reports: BTreeMap::new() };
    for (name, c) in variants {
        let c = EvalConfig { baselines: vec![], ..c };
        let report = run_experiment(&c, dataset, vehicles)?;
        table.rows.insert(name.to_string(), report.methods[&method].clone());
        table.reports.insert(name.to_string(), report);
    }
    if !cfg.baselines.is_empty() {
        let c = EvalConfig { env_mode: EnvMode::ReactiveReplay, ..cfg.clone() };
        let report = run_baselines(&c, dataset, vehicles)?;
        for (m, summary) in &report.methods {
            table.rows.insert(m.as_str().to_string(), summary.clone());
        }
        table.reports.insert("baselines".to_string(), report);
    }
    Ok(table)
}

/// One row per scene and method.
pub fn write_report_csv<W: Write>(w: W, report: &EvalReport) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["vehicle_id", "scene_id", "split", "method", "env_mode", "human_likeness"])?;
    for r in &report.rows {
        wtr.write_record([
            r.vehicle_id.to_string(),
            r.scene_id.clone(),
            match r.split {
                Split::Train => "train".into(),
                Split::Test => "test".into(),
            },
            r.method.as_str().to_string(),
            r.env_mode.as_str().to_string(),
            format!("{:?}", r.human_likeness),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_uses_configured_counts_or_proportion() {
        let cfg = EvalConfig::default();
        assert_eq!(split_counts(50, &cfg).unwrap(), (35, 15));
        assert_eq!(split_counts(80, &cfg).unwrap(), (35, 15));
        assert_eq!(split_counts(12, &cfg).unwrap(), (8, 4));
        assert_eq!(split_counts(2, &cfg).unwrap(), (1, 1));
        assert!(matches!(split_counts(1, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn aggregation_is_mean_of_vehicle_means() {
        let v = |id, hl| VehicleSummary {
            vehicle_id: id,
            method: Method::ConstVel,
            train_scenes: 0,
            test_scenes: 3,
            train_human_likeness: None,
            train_log_likelihood: None,
            test_human_likeness: hl,
        };
        let a = summarize(&[v(1, 1.0), v(2, 4.0)]);
        let b = summarize(&[v(2, 4.0), v(1, 1.0)]);
        assert_eq!(a, b);
        assert_eq!(a[&Method::ConstVel].test_human_likeness, 2.5);
        assert_eq!(a[&Method::ConstVel].train_human_likeness, None);
    }
}
