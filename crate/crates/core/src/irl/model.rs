use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{RewardWeights, TrainConfig, TrainReport};
use crate::error::{Error, Result};
use crate::features::{NormalizationConstants, FEATURE_COUNT, FEATURE_NAMES};
use crate::sim::EnvMode;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// Learned weights plus everything needed to apply them to new scenes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub feature_names: Vec<String>,
    /// Weights keyed by feature name, in feature order.
    pub weights: Vec<(String, f64)>,
    pub frozen: Vec<String>,
    pub hyperparameters: TrainConfig,
    pub seed: u64,
    pub env_mode: EnvMode,
    pub normalization: NormalizationConstants,
    pub normalization_fingerprint: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl ModelFile {
    pub fn new(report: &TrainReport, normalization: NormalizationConstants, env_mode: EnvMode) -> Self {
        let w = &report.weights;
        Self {
            schema_version: MODEL_SCHEMA_VERSION,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            weights: FEATURE_NAMES.iter().zip(&w.theta).map(|(n, t)| (n.to_string(), *t)).collect(),
            frozen: FEATURE_NAMES
                .iter()
                .zip(&w.frozen)
                .filter(|(_, f)| **f)
                .map(|(n, _)| n.to_string())
                .collect(),
            hyperparameters: report.config,
            seed: report.config.seed,
            env_mode,
            normalization,
            normalization_fingerprint: normalization.fingerprint(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn reward_weights(&self) -> RewardWeights {
        let mut w = RewardWeights::zero(self.hyperparameters.drop_interaction);
        for i in 0..FEATURE_COUNT {
            w.theta[i] = self.weights[i].1;
            w.frozen[i] = self.frozen.iter().any(|f| f == FEATURE_NAMES[i]);
        }
        w
    }

    /// Refuses constants other than those the model was trained with.
    pub fn check_normalization(&self, c: &NormalizationConstants) -> Result<()> {
        if c.fingerprint() != self.normalization_fingerprint {
            return Err(Error::Version(format!(
                "model was trained with normalization {}, the buffer uses {}",
                self.normalization_fingerprint,
                c.fingerprint()
            )));
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Version(format!(
                "model schema version {} is not supported (expected {MODEL_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let names_match = self.feature_names.iter().map(String::as_str).eq(FEATURE_NAMES)
            && self.weights.iter().map(|(n, _)| n.as_str()).eq(FEATURE_NAMES);
        if !names_match {
            return Err(Error::Version(format!("model features {:?} differ from {:?}", self.feature_names, FEATURE_NAMES)));
        }
        if self.normalization.fingerprint() != self.normalization_fingerprint {
            return Err(Error::Version("model normalization fingerprint does not match its constants".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let m: ModelFile = serde_json::from_slice(&std::fs::read(path)?)?;
        m.validate()?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;
    use crate::irl::{train, SceneBuffer, SceneEntry};

    fn report() -> TrainReport {
        let e = SceneEntry {
            scene_id: "a".into(),
            demo: FeatureVector([0.5; 8]),
            candidates: vec![FeatureVector([0.2; 8]), FeatureVector([0.9; 8])],
            candidate_endpoints: vec![(1.0, 0.0), (2.0, 0.0)],
            gt_endpoint: (1.0, 0.0),
        };
        train(&SceneBuffer { entries: vec![e] }, &TrainConfig { epochs: 3, seed: 5, ..Default::default() }).unwrap()
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let r = report();
        let m = ModelFile::new(&r, NormalizationConstants::default(), EnvMode::ReactiveReplay);
        m.save(&path).unwrap();
        let back = ModelFile::load(&path).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.reward_weights(), r.weights);
        assert_eq!(back.frozen, vec!["collision".to_string()]);
        assert_eq!(back.weights[6], ("collision".to_string(), -10.0));
    }

    #[test]
    fn version_and_normalization_guards() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let m = ModelFile::new(&report(), NormalizationConstants::default(), EnvMode::ReactiveReplay);
        let other = NormalizationConstants { divisors: [2.0; 8] };
        assert!(matches!(m.check_normalization(&other), Err(Error::Version(_))));
        assert!(m.check_normalization(&NormalizationConstants::default()).is_ok());

        let mut old = m.clone();
        old.schema_version = 0;
        old.save(&path).unwrap();
        assert!(matches!(ModelFile::load(&path), Err(Error::Version(_))));
    }
}
