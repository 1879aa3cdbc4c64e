use std::path::Path;

use anyhow::Context;
use drive_irl::eval::{EvalConfig, Method, ModelingMode};
use drive_irl::ingest::{LengthUnit, SceneWindows};
use drive_irl::irl::TrainConfig;
use drive_irl::sampling::SamplingConfig;
use drive_irl::sim::{EnvConfig, EnvMode, IdmParams, MobilParams};
use drive_irl::trajectory::SamplingSpace;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Everything a run depends on. Missing keys in a config file take the
/// defaults below; command-line flags override both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub unit: LengthUnit,
    pub sampling: SamplingSpace,
    pub env: EnvConfig,
    pub train: TrainParams,
    pub eval: EvalParams,
    /// Vehicles to process; all vehicles with enough scenes when absent.
    pub vehicles: Option<Vec<i64>>,
    /// Cap on the number of vehicles taken when `vehicles` is absent.
    pub max_vehicles: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainParams {
    pub lambda: f64,
    pub alpha: f64,
    pub epochs: usize,
    pub include_demo_in_partition: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalParams {
    pub mode: ModelingMode,
    pub train_scenes: usize,
    pub test_scenes: usize,
    pub use_interaction_feature: bool,
    pub baselines: Vec<Method>,
    pub baseline_idm: IdmParams,
    pub baseline_mobil: MobilParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            unit: LengthUnit::Feet,
            sampling: SamplingSpace::default(),
            env: EnvConfig::default(),
            train: TrainParams::default(),
            eval: EvalParams::default(),
            vehicles: None,
            max_vehicles: None,
        }
    }
}

impl Default for TrainParams {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self { lambda: t.lambda, alpha: t.alpha, epochs: t.epochs, include_demo_in_partition: false }
    }
}

impl Default for EvalParams {
    fn default() -> Self {
        let e = EvalConfig::default();
        Self {
            mode: e.mode,
            train_scenes: e.train_scenes,
            test_scenes: e.test_scenes,
            use_interaction_feature: true,
            baselines: vec![],
            baseline_idm: e.baseline_idm,
            baseline_mobil: e.baseline_mobil,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| drive_irl::Error::Config(format!("parsing config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), drive_irl::Error> {
        let bad = |what: &str| Err(drive_irl::Error::Config(format!("{what} must be positive")));
        if !(self.sampling.horizon > 0.0) {
            return bad("sampling.horizon");
        }
        if !(self.sampling.speed_step > 0.0) {
            return bad("sampling.speed_step");
        }
        if !(self.sampling.speed_half_range >= 0.0) {
            return Err(drive_irl::Error::Config("sampling.speed_half_range must be non-negative".into()));
        }
        if !(self.train.alpha > 0.0) {
            return bad("train.alpha");
        }
        if !(self.train.lambda >= 0.0) {
            return Err(drive_irl::Error::Config("train.lambda must be non-negative".into()));
        }
        if self.eval.train_scenes == 0 || self.eval.test_scenes == 0 {
            return bad("eval.train_scenes and eval.test_scenes");
        }
        if !(self.eval.baseline_mobil.b_safe > 0.0) {
            return bad("eval.baseline_mobil.b_safe");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn windows(&self) -> SceneWindows {
        SceneWindows { horizon: self.sampling.horizon, ..SceneWindows::default() }
    }

    pub fn sampling_config(&self, mode: EnvMode) -> SamplingConfig {
        SamplingConfig { space: self.sampling, env: EnvConfig { mode, ..self.env }, ..SamplingConfig::default() }
    }

    pub fn train_config(&self, drop_interaction: bool) -> TrainConfig {
        TrainConfig {
            lambda: self.train.lambda,
            alpha: self.train.alpha,
            epochs: self.train.epochs,
            seed: self.seed,
            partition: if self.train.include_demo_in_partition {
                drive_irl::irl::Partition::WithDemonstration
            } else {
                drive_irl::irl::Partition::GeneratedOnly
            },
            drop_interaction,
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            mode: self.eval.mode,
            env_mode: self.env.mode,
            use_interaction_feature: self.eval.use_interaction_feature,
            train_scenes: self.eval.train_scenes,
            test_scenes: self.eval.test_scenes,
            baselines: self.eval.baselines.clone(),
            train: self.train_config(!self.eval.use_interaction_feature),
            sampling: self.sampling_config(self.env.mode),
            windows: self.windows(),
            baseline_idm: self.eval.baseline_idm,
            baseline_mobil: self.eval.baseline_mobil,
            seed: self.seed,
        }
    }
}
