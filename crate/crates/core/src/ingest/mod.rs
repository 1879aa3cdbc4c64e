//! Trajectory data: NGSIM parsing, smoothing, scene segmentation and the
//! canonical track store.
//!
//! Internally `x` is the along-road coordinate and `y` the cross-road
//! coordinate, both in meters. NGSIM's `Local_X`/`Local_Y` are swapped on
//! parse.

mod ngsim;
mod scenes;
mod smooth;
mod store;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use ngsim::{parse_ngsim_csv, parse_ngsim_reader, LengthUnit, FEET_TO_METERS};
pub use scenes::{refit_demonstration, segment_scenes, NeighborSlice, Scene, SceneWindows};
pub use smooth::{smooth_track, SavitzkyGolay, ACCEL_SANITY_BOUND, SMOOTHING_ORDER, SMOOTHING_WINDOW};
pub use store::{read_store, read_store_reader, write_store, write_store_writer, StoreFormat};

/// Position, velocity and acceleration in road-local coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Kinematics {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub ax: f64,
    pub ay: f64,
}

impl Kinematics {
    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }

    pub fn heading(&self) -> f64 {
        if self.vx == 0.0 && self.vy == 0.0 {
            0.0
        } else {
            self.vy.atan2(self.vx)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub ax: f64,
    pub ay: f64,
    pub lane_id: u8,
}

impl TrackState {
    pub fn kinematics(&self) -> Kinematics {
        Kinematics {
            x: self.x,
            y: self.y,
            vx: self.vx,
            vy: self.vy,
            ax: self.ax,
            ay: self.ay,
        }
    }
}

/// One vehicle's gap-free state sequence at `dt` spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleTrack {
    pub vehicle_id: i64,
    /// Frame index of `states[0]`; time is `frame * dt`.
    pub first_frame: i64,
    pub dt: f64,
    pub states: Vec<TrackState>,
    pub length: f64,
    pub width: f64,
}

impl VehicleTrack {
    pub fn t0(&self) -> f64 {
        self.first_frame as f64 * self.dt
    }

    pub fn last_frame(&self) -> i64 {
        self.first_frame + self.states.len() as i64 - 1
    }

    /// Time span covered by the samples.
    pub fn duration(&self) -> f64 {
        self.states.len().saturating_sub(1) as f64 * self.dt
    }

    pub fn at_frame(&self, frame: i64) -> Option<&TrackState> {
        if frame < self.first_frame {
            return None;
        }
        self.states.get((frame - self.first_frame) as usize)
    }

    /// Sub-track covering frames `[from, to]` intersected with the track.
    pub fn slice_frames(&self, from: i64, to: i64) -> Option<VehicleTrack> {
        let lo = from.max(self.first_frame);
        let hi = to.min(self.last_frame());
        if lo > hi {
            return None;
        }
        let start = (lo - self.first_frame) as usize;
        let end = (hi - self.first_frame) as usize;
        Some(VehicleTrack {
            vehicle_id: self.vehicle_id,
            first_frame: lo,
            dt: self.dt,
            states: self.states[start..=end].to_vec(),
            length: self.length,
            width: self.width,
        })
    }
}

/// All tracks of a recording keyed by vehicle id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub tracks: BTreeMap<i64, VehicleTrack>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn get(&self, vehicle_id: i64) -> Option<&VehicleTrack> {
        self.tracks.get(&vehicle_id)
    }
}
