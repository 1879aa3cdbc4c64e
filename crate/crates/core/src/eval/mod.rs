//! Scoring learned rewards and baselines on held-out scenes.

mod baselines;
mod experiment;
mod metrics;

pub use baselines::{constant_velocity_predict, idm_mobil_predict};
pub use experiment::{
    evaluate_entries, run_ablation_table, run_baselines, run_experiment, split_counts, vehicle_scenes, write_report_csv, AblationTable,
    EvalConfig, EvalReport, Method, MethodSummary, ModelingMode, SceneRow, Split, VehicleSummary,
    GENERAL_POOL_SCENES, GENERAL_POOL_VEHICLES,
};
pub use metrics::{average_ranks, displacement, human_likeness, spearman};
