use super::{RoadModel, VehicleState};

/// Corners of the vehicle's footprint, counter-clockwise.
pub fn corners(s: &VehicleState) -> [(f64, f64); 4] {
    let (c, sn) = (s.heading.cos(), s.heading.sin());
    let (hl, hw) = (s.length / 2.0, s.width / 2.0);
    [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)].map(|(dx, dy)| (s.x + dx * c - dy * sn, s.y + dx * sn + dy * c))
}

/// Oriented-rectangle overlap by the separating axis test. Touching counts.
pub fn collision_check(a: &VehicleState, b: &VehicleState) -> bool {
    let ca = corners(a);
    let cb = corners(b);
    let axes = [
        (a.heading.cos(), a.heading.sin()),
        (-a.heading.sin(), a.heading.cos()),
        (b.heading.cos(), b.heading.sin()),
        (-b.heading.sin(), b.heading.cos()),
    ];
    axes.iter().all(|&(ux, uy)| {
        let project = |pts: &[(f64, f64); 4]| {
            pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, y)| {
                let d = x * ux + y * uy;
                (lo.min(d), hi.max(d))
            })
        };
        let (a_lo, a_hi) = project(&ca);
        let (b_lo, b_hi) = project(&cb);
        a_lo <= b_hi && b_lo <= a_hi
    })
}

/// Any corner outside the paved road.
pub fn curb_collision(s: &VehicleState, road: &RoadModel) -> bool {
    corners(s)
        .iter()
        .any(|&(x, y)| y < road.left_boundary() || y > road.right_boundary(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::VehicleMode;

    fn car(x: f64, y: f64, heading: f64) -> VehicleState {
        VehicleState { x, y, heading, speed: 10.0, accel: 0.0, length: 4.9, width: 1.8, mode: VehicleMode::Replay }
    }

    #[test]
    fn identical_states_collide() {
        assert!(collision_check(&car(10.0, 5.0, 0.0), &car(10.0, 5.0, 0.0)));
    }

    #[test]
    fn far_apart_in_lane_do_not_collide() {
        assert!(!collision_check(&car(10.0, 5.0, 0.0), &car(40.0, 5.0, 0.0)));
    }

    #[test]
    fn aligned_overlap_by_half_lengths() {
        assert!(collision_check(&car(10.0, 5.0, 0.0), &car(14.5, 5.0, 0.0)));
        assert!(!collision_check(&car(10.0, 5.0, 0.0), &car(15.0, 5.0, 0.0)));
    }

    #[test]
    fn adjacent_lanes_clear() {
        assert!(!collision_check(&car(10.0, 1.83, 0.0), &car(10.0, 5.49, 0.0)));
    }

    #[test]
    fn rotation_matters() {
        // Side by side 2.2 m apart: clear when aligned, hit when one is turned 90°.
        assert!(!collision_check(&car(10.0, 5.0, 0.0), &car(10.0, 7.2, 0.0)));
        assert!(collision_check(&car(10.0, 5.0, 0.0), &car(10.0, 7.2, std::f64::consts::FRAC_PI_2)));
    }

    #[test]
    fn curb_detection() {
        let road = RoadModel::us101();
        assert!(!curb_collision(&car(100.0, 1.83, 0.0), &road));
        assert!(curb_collision(&car(100.0, 0.5, 0.0), &road));
        assert!(curb_collision(&car(300.0, 21.5, 0.0), &road));
    }
}
