use std::io::Write;

use log::debug;
use serde::{Deserialize, Serialize};

use super::{
    candidate_distribution, gradient, mean_feature_gap_norm, objective, scene_log_likelihood, Partition,
    RewardWeights, SceneBuffer,
};
use crate::error::{Error, Result};
use crate::eval::human_likeness;
use crate::features::FEATURE_COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda: f64,
    pub alpha: f64,
    pub epochs: usize,
    pub seed: u64,
    pub partition: Partition,
    /// Holds the interaction weight at zero.
    pub drop_interaction: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            alpha: 0.05,
            epochs: 200,
            seed: 0,
            partition: Partition::GeneratedOnly,
            drop_interaction: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: [f64; FEATURE_COUNT],
    v: [f64; FEATURE_COUNT],
    t: i32,
}

impl Default for Adam {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8, m: [0.0; FEATURE_COUNT], v: [0.0; FEATURE_COUNT], t: 0 }
    }
}

impl Adam {
    /// Bias-corrected ascent step; components with a zero mask stay put.
    pub fn step(&mut self, theta: &mut [f64; FEATURE_COUNT], grad: &[f64; FEATURE_COUNT], frozen: &[bool], alpha: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..FEATURE_COUNT {
            if frozen[i] {
                continue;
            }
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            theta[i] += alpha * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub objective: f64,
    /// Mean over scenes.
    pub log_likelihood: f64,
    /// L2 norm of the scene-averaged feature gap.
    pub feature_gap_norm: f64,
    /// Mean over scenes, meters.
    pub human_likeness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config: TrainConfig,
    pub initial_weights: RewardWeights,
    /// Statistics before the first update.
    pub initial: EpochStats,
    /// One row per epoch, after that epoch's update.
    pub epochs: Vec<EpochStats>,
    pub weights: RewardWeights,
}

impl TrainReport {
    pub fn last(&self) -> &EpochStats {
        self.epochs.last().unwrap_or(&self.initial)
    }
}

fn stats(epoch: usize, w: &RewardWeights, buffer: &SceneBuffer, cfg: &TrainConfig) -> Result<EpochStats> {
    let j = objective(w, buffer, cfg.lambda, cfg.partition);
    if !j.is_finite() {
        return Err(Error::Numeric(format!("objective is {j} at epoch {epoch} with theta {:?}", w.theta)));
    }
    let n = buffer.len().max(1) as f64;
    let ll = buffer.entries.iter().map(|e| scene_log_likelihood(w, e, cfg.partition)).sum::<f64>() / n;
    let mut hl = 0.0;
    for e in &buffer.entries {
        let p = candidate_distribution(w, e, cfg.partition);
        hl += human_likeness(&p, &e.candidate_endpoints, e.gt_endpoint)?;
    }
    Ok(EpochStats {
        epoch,
        objective: j,
        log_likelihood: ll,
        feature_gap_norm: mean_feature_gap_norm(w, buffer, cfg.partition),
        human_likeness: hl / n,
    })
}

/// Full-batch Adam ascent on the regularized log-likelihood of a normalized
/// buffer.
pub fn train(buffer: &SceneBuffer, cfg: &TrainConfig) -> Result<TrainReport> {
    if buffer.is_empty() {
        return Err(Error::Config("training buffer holds no scenes".into()));
    }
    buffer.validate()?;
    let initial_weights = RewardWeights::initial(cfg.seed, cfg.drop_interaction);
    let mut w = initial_weights;
    let initial = stats(0, &w, buffer, cfg)?;
    let mut adam = Adam::default();
    let mut epochs = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let g = gradient(&w, buffer, cfg.lambda, cfg.partition);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("gradient is not finite at epoch {epoch}: {g:?}")));
        }
        adam.step(&mut w.theta, &g, &w.frozen, cfg.alpha);
        let s = stats(epoch, &w, buffer, cfg)?;
        debug!("epoch {epoch}: J={:.6} gap={:.6} hl={:.3}", s.objective, s.feature_gap_norm, s.human_likeness);
        epochs.push(s);
    }
    Ok(TrainReport { config: *cfg, initial_weights, initial, epochs, weights: w })
}

/// Epoch 0 (initial weights) followed by every training epoch.
pub fn write_report_csv<W: Write>(w: W, report: &TrainReport) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["epoch", "objective", "log_likelihood", "feature_gap_l2", "human_likeness"])?;
    for s in std::iter::once(&report.initial).chain(&report.epochs) {
        wtr.write_record([
            s.epoch.to_string(),
            format!("{:?}", s.objective),
            format!("{:?}", s.log_likelihood),
            format!("{:?}", s.feature_gap_norm),
            format!("{:?}", s.human_likeness),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
