//! Highway environment model.
//!
//! The ego tracks a candidate plan with a pure-pursuit controller on a
//! kinematic bicycle. Surrounding vehicles replay their logs until the vehicle
//! ahead of them is the ego (or a vehicle already pushed off its log) and the
//! gap drops below the IDM desired gap; from then on they are driven by IDM.

mod collision;
mod idm;
mod mobil;
mod pursuit;
mod road;
mod rollout;
mod traffic;

use serde::{Deserialize, Serialize};

pub use collision::{collision_check, corners, curb_collision};
pub use idm::{idm_acceleration, IdmParams, ACCEL_FLOOR};
pub use mobil::{mobil_incentive, mobil_decision, LaneChangeAccels, MobilParams};
pub use pursuit::{bicycle_step, pure_pursuit_step, reference_at, ControllerParams};
pub use road::{Lane, LaneKind, RoadModel};
pub use traffic::{find_follower, find_leader, idm_in_band, lane_change_accels, mobil_lane_choice, TrafficBody};
pub use rollout::{
    rollout, write_trace_jsonl, Collision, EnvConfig, OverrideEvent, RolloutResult, V0Policy,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleMode {
    Replay,
    IdmOverride,
    Ego,
    /// Driven by the IDM+MOBIL forecast instead of a log.
    Forecast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
    pub accel: f64,
    pub length: f64,
    pub width: f64,
    pub mode: VehicleMode,
}

impl VehicleState {
    pub fn vx(&self) -> f64 {
        self.speed * self.heading.cos()
    }
}

/// How surrounding vehicles behave during a rollout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvMode {
    /// Log replay with chained IDM overrides.
    #[default]
    ReactiveReplay,
    /// Log replay only; nobody reacts to the ego.
    FixedReplay,
    /// IDM+MOBIL forecast from the initial states, no log access.
    Forecast,
}

impl EnvMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EnvMode::ReactiveReplay => "reactive_replay",
            EnvMode::FixedReplay => "fixed_replay",
            EnvMode::Forecast => "forecast",
        }
    }
}

impl std::fmt::Display for EnvMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EnvMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "reactive_replay" | "reactive" => Ok(EnvMode::ReactiveReplay),
            "fixed_replay" | "fixed" => Ok(EnvMode::FixedReplay),
            "forecast" => Ok(EnvMode::Forecast),
            other => Err(crate::Error::Config(format!("unknown env mode `{other}`"))),
        }
    }
}
