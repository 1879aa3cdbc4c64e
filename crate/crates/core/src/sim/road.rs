use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneKind {
    Main,
    Auxiliary,
    OnRamp,
    OffRamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub id: u8,
    pub kind: LaneKind,
    pub center_y: f64,
    pub width: f64,
    /// Longitudinal extent of the lane.
    pub x_start: f64,
    pub x_end: f64,
}

/// Straight multi-lane road; `y` grows from the left curb (lane 1) outward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadModel {
    pub length: f64,
    pub lane_width: f64,
    pub lanes: Vec<Lane>,
}

impl Default for RoadModel {
    fn default() -> Self {
        Self::us101()
    }
}

impl RoadModel {
    /// The US-101 study section: 640 m, five 3.66 m main lanes, an auxiliary
    /// lane between an on-ramp and an off-ramp. Ramp extents are approximate.
    pub fn us101() -> Self {
        let w = 3.66;
        let length = 640.0;
        let mut lanes: Vec<Lane> = (1..=5)
            .map(|id| Lane {
                id,
                kind: LaneKind::Main,
                center_y: (id as f64 - 0.5) * w,
                width: w,
                x_start: 0.0,
                x_end: length,
            })
            .collect();
        lanes.push(Lane { id: 6, kind: LaneKind::Auxiliary, center_y: 5.5 * w, width: w, x_start: 180.0, x_end: 430.0 });
        lanes.push(Lane { id: 7, kind: LaneKind::OnRamp, center_y: 6.5 * w, width: w, x_start: 0.0, x_end: 180.0 });
        lanes.push(Lane { id: 8, kind: LaneKind::OffRamp, center_y: 7.5 * w, width: w, x_start: 430.0, x_end: length });
        Self { length, lane_width: w, lanes }
    }

    pub fn lane(&self, id: u8) -> Option<&Lane> {
        self.lanes.iter().find(|l| l.id == id)
    }

    /// Center `y` of a lane; unknown ids fall back to the main-lane formula.
    pub fn lane_center(&self, id: u8) -> f64 {
        self.lane(id)
            .map(|l| l.center_y)
            .unwrap_or((id as f64 - 0.5) * self.lane_width)
    }

    /// Main lane to the left, if any. The auxiliary lane's left neighbor is lane 5.
    pub fn left_of(&self, id: u8) -> Option<u8> {
        match id {
            2..=5 => Some(id - 1),
            6 => Some(5),
            _ => None,
        }
    }

    /// Main lane to the right, if any. Auxiliary and ramp lanes are never
    /// offered to mainline traffic.
    pub fn right_of(&self, id: u8) -> Option<u8> {
        match id {
            1..=4 => Some(id + 1),
            _ => None,
        }
    }

    /// Lane whose band contains `(x, y)`, preferring main lanes.
    pub fn lane_at(&self, x: f64, y: f64) -> Option<u8> {
        self.lanes
            .iter()
            .filter(|l| x >= l.x_start && x <= l.x_end)
            .find(|l| (y - l.center_y).abs() <= l.width / 2.0)
            .map(|l| l.id)
    }

    pub fn left_boundary(&self) -> f64 {
        0.0
    }

    /// Outer edge of the paved road at `x`.
    pub fn right_boundary(&self, x: f64) -> f64 {
        self.lanes
            .iter()
            .filter(|l| x >= l.x_start && x <= l.x_end)
            .map(|l| l.center_y + l.width / 2.0)
            .fold(5.0 * self.lane_width, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lane_centers_are_ordered_and_positive_width() {
        let road = RoadModel::us101();
        let mut ids: Vec<u8> = road.lanes.iter().map(|l| l.id).collect();
        ids.sort();
        let centers: Vec<f64> = ids.iter().map(|&id| road.lane_center(id)).collect();
        assert!(centers.windows(2).all(|w| w[0] < w[1]));
        assert!(road.lanes.iter().all(|l| l.width > 0.0));
        assert!((road.lane_center(1) - 1.83).abs() < 1e-12);
        assert!((road.lane_center(3) - 9.15).abs() < 1e-12);
    }

    #[test]
    fn neighbor_lanes() {
        let road = RoadModel::us101();
        assert_eq!(road.left_of(1), None);
        assert_eq!(road.right_of(1), Some(2));
        assert_eq!(road.right_of(5), None);
        assert_eq!(road.left_of(6), Some(5));
        assert_eq!(road.right_of(7), None);
    }

    #[test]
    fn lane_lookup_and_boundaries() {
        let road = RoadModel::us101();
        assert_eq!(road.lane_at(100.0, 1.0), Some(1));
        assert_eq!(road.lane_at(300.0, 20.0), Some(6));
        assert_eq!(road.lane_at(100.0, 20.0), None);
        assert!((road.right_boundary(100.0) - 3.66 * 7.0).abs() < 1e-9);
        assert!((road.right_boundary(300.0) - 3.66 * 6.0).abs() < 1e-9);
    }
}
