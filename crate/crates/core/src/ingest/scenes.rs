use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{Dataset, Kinematics, TrackState, VehicleTrack};
use crate::error::{Error, Result};
use crate::trajectory::{CandidateTrajectory, PolynomialPair, TargetState, TrajectorySource};
use crate::{HORIZON, INTERACTION_RANGE};

/// How a vehicle's track is cut into decision windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneWindows {
    pub horizon: f64,
    /// Maximum number of windows per vehicle.
    pub count: usize,
    /// Neighbors are gathered when they come this close to the ego longitudinally.
    pub gather_range: f64,
}

impl Default for SceneWindows {
    fn default() -> Self {
        Self {
            horizon: HORIZON,
            count: 50,
            gather_range: INTERACTION_RANGE,
        }
    }
}

/// A surrounding vehicle's log restricted to a scene window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborSlice {
    /// Scene step at which `track.states[0]` applies.
    pub offset: usize,
    pub track: VehicleTrack,
    /// The log ends before the window does (the vehicle left the study area).
    pub exits: bool,
}

impl NeighborSlice {
    pub fn state_at(&self, step: usize) -> Option<&TrackState> {
        step.checked_sub(self.offset).and_then(|i| self.track.states.get(i))
    }
}

/// One decision window: the ego's initial state, its recorded future and the
/// logs of the vehicles around it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub scene_id: String,
    pub ego_id: i64,
    pub start_frame: i64,
    pub start_time: f64,
    pub horizon: f64,
    pub ego_init: Kinematics,
    pub ego_lane: u8,
    pub ego_length: f64,
    pub ego_width: f64,
    pub neighbors: BTreeMap<i64, NeighborSlice>,
    /// Recorded ego states, `horizon / dt + 1` of them.
    pub ego_ground_truth: VehicleTrack,
}

impl Scene {
    pub fn steps(&self) -> usize {
        self.ego_ground_truth.states.len().saturating_sub(1)
    }

    pub fn dt(&self) -> f64 {
        self.ego_ground_truth.dt
    }

    pub fn ground_truth_end(&self) -> (f64, f64) {
        let s = self.ego_ground_truth.states.last().expect("ground truth has states");
        (s.x, s.y)
    }

    /// Builds a scene from an ego window and already-sliced neighbors.
    pub fn from_parts(
        scene_id: impl Into<String>,
        ego_window: VehicleTrack,
        neighbors: BTreeMap<i64, NeighborSlice>,
    ) -> Self {
        let first = ego_window.states[0];
        Scene {
            scene_id: scene_id.into(),
            ego_id: ego_window.vehicle_id,
            start_frame: ego_window.first_frame,
            start_time: ego_window.t0(),
            horizon: ego_window.duration(),
            ego_init: first.kinematics(),
            ego_lane: first.lane_id,
            ego_length: ego_window.length,
            ego_width: ego_window.width,
            neighbors,
            ego_ground_truth: ego_window,
        }
    }
}

/// Cuts `track` into consecutive non-overlapping windows of `windows.horizon`.
///
/// Adjacent windows share their boundary sample; as half-open time intervals
/// they are disjoint. When the track holds fewer than `windows.count` windows
/// every window that fits is returned and a warning is logged.
pub fn segment_scenes(track: &VehicleTrack, dataset: &Dataset, windows: &SceneWindows) -> Vec<Scene> {
    let steps = (windows.horizon / track.dt).round() as usize;
    if steps == 0 || track.states.is_empty() {
        return Vec::new();
    }
    let fit = (track.states.len() - 1) / steps;
    if fit < windows.count {
        warn!(
            "vehicle {}: only {fit} of {} requested {} s scenes fit in its {:.1} s track",
            track.vehicle_id,
            windows.count,
            windows.horizon,
            track.duration()
        );
    }
    (0..fit.min(windows.count))
        .map(|k| {
            let start = track.first_frame + (k * steps) as i64;
            let end = start + steps as i64;
            let ego = track.slice_frames(start, end).expect("window lies inside the track");
            let neighbors = gather_neighbors(&ego, dataset, windows.gather_range);
            Scene::from_parts(format!("{}-{:02}", track.vehicle_id, k), ego, neighbors)
        })
        .collect()
}

fn gather_neighbors(ego: &VehicleTrack, dataset: &Dataset, range: f64) -> BTreeMap<i64, NeighborSlice> {
    let (start, end) = (ego.first_frame, ego.last_frame());
    let mut out = BTreeMap::new();
    for (&id, other) in &dataset.tracks {
        if id == ego.vehicle_id {
            continue;
        }
        let Some(slice) = other.slice_frames(start, end) else {
            continue;
        };
        let near = (slice.first_frame..=slice.last_frame()).any(|f| {
            let (a, b) = (ego.at_frame(f), slice.at_frame(f));
            matches!((a, b), (Some(a), Some(b)) if (a.x - b.x).abs() <= range)
        });
        if near {
            out.insert(
                id,
                NeighborSlice {
                    offset: (slice.first_frame - start) as usize,
                    exits: slice.last_frame() < end,
                    track: slice,
                },
            );
        }
    }
    out
}

/// Replaces the recorded ego trajectory by the polynomial pair that matches its
/// initial state and terminal condition.
pub fn refit_demonstration(scene: &Scene) -> Result<CandidateTrajectory> {
    let gt = &scene.ego_ground_truth;
    let expected = (scene.horizon / gt.dt).round() as usize + 1;
    if gt.states.len() != expected || gt.states.len() < 2 {
        return Err(Error::Config(format!(
            "scene {}: ground truth has {} states, expected {expected}",
            scene.scene_id,
            gt.states.len()
        )));
    }
    let init = gt.states[0].kinematics();
    let end = gt.states[gt.states.len() - 1];
    let target = TargetState {
        vxe: end.vx,
        axe: end.ax,
        ye: end.y,
        vye: end.vy,
        aye: end.ay,
    };
    let poly = PolynomialPair::solve(&init, &target, scene.horizon)?;
    Ok(CandidateTrajectory::from_poly(poly, TrajectorySource::Demonstration, None))
}
