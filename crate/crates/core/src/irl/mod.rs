//! Maximum-entropy reward learning over a sampled candidate buffer.
//!
//! Each scene contributes the log-probability of its demonstration under a
//! Boltzmann distribution whose partition function is approximated by the
//! scene's generated candidates.

mod buffer;
mod model;
mod train;

pub use buffer::{read_buffer_csv, write_buffer_csv, SceneBuffer, SceneEntry};
pub use model::{ModelFile, MODEL_SCHEMA_VERSION};
pub use train::{train, write_report_csv, Adam, EpochStats, TrainConfig, TrainReport};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::{FeatureVector, COLLISION, FEATURE_COUNT, INTERACTION};

/// Weight held on the collision feature; it is never learned.
pub const COLLISION_WEIGHT: f64 = -10.0;
/// Standard deviation of the initial weight draw.
pub const INIT_STD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    pub theta: [f64; FEATURE_COUNT],
    /// Components excluded from learning and regularization.
    pub frozen: [bool; FEATURE_COUNT],
}

impl RewardWeights {
    /// Zero weights apart from the fixed collision penalty.
    pub fn zero(drop_interaction: bool) -> Self {
        let mut w = Self { theta: [0.0; FEATURE_COUNT], frozen: [false; FEATURE_COUNT] };
        w.theta[COLLISION] = COLLISION_WEIGHT;
        w.frozen[COLLISION] = true;
        if drop_interaction {
            w.frozen[INTERACTION] = true;
        }
        w
    }

    /// Seeded draw from N(0, `INIT_STD`²) for every learnable component.
    ///
    /// One normal variate is consumed per component in feature order, frozen
    /// or not, so the learnable draws do not depend on the mask.
    pub fn initial(seed: u64, drop_interaction: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, INIT_STD).expect("positive std");
        let mut w = Self::zero(drop_interaction);
        for i in 0..FEATURE_COUNT {
            let v = normal.sample(&mut rng);
            if !w.frozen[i] {
                w.theta[i] = v;
            }
        }
        w
    }

    pub fn from_theta(theta: [f64; FEATURE_COUNT], drop_interaction: bool) -> Self {
        let mut w = Self::zero(drop_interaction);
        for i in 0..FEATURE_COUNT {
            if !w.frozen[i] {
                w.theta[i] = theta[i];
            }
        }
        w
    }

    pub fn reward(&self, f: &FeatureVector) -> f64 {
        f.dot(&self.theta)
    }

    /// Sum of squares over learnable components.
    pub fn learnable_norm_sq(&self) -> f64 {
        self.theta
            .iter()
            .zip(&self.frozen)
            .filter(|(_, fz)| !**fz)
            .map(|(t, _)| t * t)
            .sum()
    }

    pub fn drops_interaction(&self) -> bool {
        self.frozen[INTERACTION]
    }
}

/// Whether the demonstration joins the candidates in the partition sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    #[default]
    GeneratedOnly,
    WithDemonstration,
}

fn logsumexp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

fn partition_rewards<'a>(
    w: &'a RewardWeights,
    e: &'a SceneEntry,
    partition: Partition,
) -> impl Iterator<Item = f64> + Clone + 'a {
    let demo = (partition == Partition::WithDemonstration).then(|| w.reward(&e.demo));
    e.candidates.iter().map(|f| w.reward(f)).chain(demo)
}

/// Boltzmann probabilities of the scene's generated candidates.
///
/// With [`Partition::WithDemonstration`] the demonstration takes part in the
/// normalizer, so the returned values sum to less than one.
pub fn candidate_distribution(w: &RewardWeights, e: &SceneEntry, partition: Partition) -> Vec<f64> {
    let lse = logsumexp(partition_rewards(w, e, partition));
    e.candidates.iter().map(|f| (w.reward(f) - lse).exp()).collect()
}

/// Log-likelihood of the scene's demonstration.
pub fn scene_log_likelihood(w: &RewardWeights, e: &SceneEntry, partition: Partition) -> f64 {
    w.reward(&e.demo) - logsumexp(partition_rewards(w, e, partition))
}

/// Regularized log-likelihood of all demonstrations.
pub fn objective(w: &RewardWeights, buffer: &SceneBuffer, lambda: f64, partition: Partition) -> f64 {
    let terms: Vec<f64> = buffer.entries.par_iter().map(|e| scene_log_likelihood(w, e, partition)).collect();
    terms.iter().sum::<f64>() - lambda * w.learnable_norm_sq()
}

/// `f_demo − E_P[f]` for one scene.
pub fn feature_gap(w: &RewardWeights, e: &SceneEntry, partition: Partition) -> FeatureVector {
    let lse = logsumexp(partition_rewards(w, e, partition));
    let mut expect = FeatureVector::zeros();
    for f in &e.candidates {
        expect.add_assign(&f.scaled((w.reward(f) - lse).exp()));
    }
    if partition == Partition::WithDemonstration {
        expect.add_assign(&e.demo.scaled((w.reward(&e.demo) - lse).exp()));
    }
    e.demo.sub(&expect)
}

/// Gradient of [`objective`]; frozen components are zero.
pub fn gradient(w: &RewardWeights, buffer: &SceneBuffer, lambda: f64, partition: Partition) -> [f64; FEATURE_COUNT] {
    let gaps: Vec<FeatureVector> = buffer.entries.par_iter().map(|e| feature_gap(w, e, partition)).collect();
    let mut g = [0.0; FEATURE_COUNT];
    for gap in &gaps {
        for (gi, v) in g.iter_mut().zip(&gap.0) {
            *gi += v;
        }
    }
    for i in 0..FEATURE_COUNT {
        g[i] = if w.frozen[i] { 0.0 } else { g[i] - 2.0 * lambda * w.theta[i] };
    }
    g
}

/// L2 norm of the scene-averaged feature gap over the components in use
/// (everything except a dropped interaction feature).
pub fn mean_feature_gap_norm(w: &RewardWeights, buffer: &SceneBuffer, partition: Partition) -> f64 {
    if buffer.entries.is_empty() {
        return 0.0;
    }
    let gaps: Vec<FeatureVector> = buffer.entries.par_iter().map(|e| feature_gap(w, e, partition)).collect();
    let mut mean = FeatureVector::zeros();
    for gap in &gaps {
        mean.add_assign(gap);
    }
    let n = buffer.entries.len() as f64;
    (0..FEATURE_COUNT)
        .filter(|&i| !(i == INTERACTION && w.drops_interaction()))
        .map(|i| (mean[i] / n).powi(2))
        .sum::<f64>()
        .sqrt()
}
