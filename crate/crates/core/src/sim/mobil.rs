use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilParams {
    /// Largest deceleration the new follower may be forced into, m/s².
    pub b_safe: f64,
    pub politeness: f64,
    /// Minimum net advantage before changing lanes, m/s².
    pub a_th: f64,
}

impl Default for MobilParams {
    fn default() -> Self {
        Self { b_safe: 2.0, politeness: 0.01, a_th: 0.2 }
    }
}

/// IDM accelerations before and after a prospective lane change.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LaneChangeAccels {
    pub ego_current: f64,
    pub ego_after: f64,
    /// Follower in the target lane, before and after the ego cuts in.
    pub new_follower_current: f64,
    pub new_follower_after: f64,
    /// Follower in the current lane, before and after the ego leaves.
    pub old_follower_current: f64,
    pub old_follower_after: f64,
}

pub fn mobil_incentive(a: &LaneChangeAccels, p: &MobilParams) -> f64 {
    (a.ego_after - a.ego_current)
        + p.politeness
            * ((a.new_follower_after - a.new_follower_current)
                + (a.old_follower_after - a.old_follower_current))
}

/// Safety criterion and incentive criterion must both hold.
pub fn mobil_decision(a: &LaneChangeAccels, p: &MobilParams) -> bool {
    a.new_follower_after >= -p.b_safe && mobil_incentive(a, p) > p.a_th
}
