//! Driving-behavior modeling with maximum-entropy inverse reinforcement
//! learning.
//!
//! The pipeline is: parse and smooth recorded highway trajectories
//! ([`ingest`]), cut them into 5 s decision scenes, sample polynomial
//! candidate plans for the ego ([`trajectory`]), roll every candidate out in
//! an interaction-aware micro-simulator ([`sim`]), accumulate per-step
//! features ([`features`]) and fit linear reward weights by maximizing the
//! likelihood of the human choice against the sampled partition function
//! ([`irl`]). [`eval`] scores learned rewards and baselines on held-out
//! scenes.

pub mod error;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod irl;
pub mod linalg;
pub mod sampling;
pub mod sim;
pub mod synthetic;
pub mod trajectory;

pub use error::{Error, Result};
pub use features::{FeatureVector, NormalizationConstants, FEATURE_COUNT, FEATURE_NAMES};
pub use ingest::{Dataset, Kinematics, Scene, TrackState, VehicleTrack};
pub use irl::{RewardWeights, SceneBuffer, SceneEntry, TrainConfig, TrainReport};
pub use sim::{EnvMode, IdmParams, MobilParams, RoadModel, RolloutResult, VehicleState};
pub use trajectory::{CandidateTrajectory, PolynomialPair, TargetState, TrajPoint};

/// Simulation and sampling step, seconds.
pub const DT: f64 = 0.1;
/// Planning horizon, seconds.
pub const HORIZON: f64 = 5.0;
/// Number of steps in one horizon; trajectories carry `HORIZON_STEPS + 1` samples.
pub const HORIZON_STEPS: usize = 50;
/// Longitudinal radius within which surrounding vehicles interact with the ego.
pub const INTERACTION_RANGE: f64 = 50.0;
