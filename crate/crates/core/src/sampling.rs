//! Candidate generation, rollout and feature extraction for whole scenes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::{trajectory_features, FeatureVector};
use crate::ingest::{refit_demonstration, Scene};
use crate::irl::{SceneBuffer, SceneEntry};
use crate::sim::{rollout, EnvConfig, RoadModel, RolloutResult};
use crate::trajectory::{generate_candidates, CandidateTrajectory, SamplingSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SamplingConfig {
    pub space: SamplingSpace,
    pub env: EnvConfig,
    pub road: RoadModel,
}

/// Rolls a trajectory out and returns its raw features and endpoint.
pub fn evaluate_candidate(
    scene: &Scene,
    candidate: &CandidateTrajectory,
    cfg: &SamplingConfig,
) -> Result<(FeatureVector, (f64, f64), RolloutResult)> {
    let r = rollout(scene, candidate, &cfg.road, &cfg.env)?;
    let f = trajectory_features(&r, cfg.road.lane_width);
    Ok((f, r.ego_end(), r))
}

/// Raw (unnormalized) buffer entry of one scene.
pub fn sample_scene(scene: &Scene, cfg: &SamplingConfig) -> Result<SceneEntry> {
    let candidates = generate_candidates(scene, &cfg.road, &cfg.space)?;
    let mut feats = Vec::with_capacity(candidates.len());
    let mut ends = Vec::with_capacity(candidates.len());
    for c in &candidates {
        let (f, end, _) = evaluate_candidate(scene, c, cfg)?;
        feats.push(f);
        ends.push(end);
    }
    let demo = refit_demonstration(scene)?;
    let (demo_f, _, _) = evaluate_candidate(scene, &demo, cfg)?;
    Ok(SceneEntry {
        scene_id: scene.scene_id.clone(),
        demo: demo_f,
        candidates: feats,
        candidate_endpoints: ends,
        gt_endpoint: scene.ground_truth_end(),
    })
}

/// Samples every scene in parallel; entries keep the input order.
pub fn sample_scenes(scenes: &[Scene], cfg: &SamplingConfig) -> Result<SceneBuffer> {
    let entries = scenes.par_iter().map(|s| sample_scene(s, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(SceneBuffer { entries })
}
