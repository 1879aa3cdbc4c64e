//! Leader/follower queries over a snapshot of vehicles and the MOBIL lane
//! choice built on them.

use super::{idm_acceleration, mobil_decision, mobil_incentive, IdmParams, LaneChangeAccels, MobilParams, RoadModel};

/// Longitudinal view of one vehicle at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficBody {
    pub x: f64,
    pub y: f64,
    /// Longitudinal speed.
    pub v: f64,
    pub length: f64,
    /// Desired speed for IDM.
    pub v0: f64,
}

/// Nearest vehicle ahead of a body placed at lateral position `y`, within
/// half a lane width. Returns its index and the bumper-to-bumper gap.
pub fn find_leader(bodies: &[TrafficBody], me: usize, y: f64, band: f64) -> Option<(usize, f64)> {
    let b = &bodies[me];
    bodies
        .iter()
        .enumerate()
        .filter(|&(j, o)| j != me && (o.y - y).abs() < band && o.x > b.x)
        .min_by(|a, c| a.1.x.total_cmp(&c.1.x))
        .map(|(j, o)| (j, o.x - b.x - 0.5 * (o.length + b.length)))
}

/// Nearest vehicle behind; returns its index and the gap to the body.
pub fn find_follower(bodies: &[TrafficBody], me: usize, y: f64, band: f64) -> Option<(usize, f64)> {
    let b = &bodies[me];
    bodies
        .iter()
        .enumerate()
        .filter(|&(j, o)| j != me && (o.y - y).abs() < band && o.x < b.x)
        .max_by(|a, c| a.1.x.total_cmp(&c.1.x))
        .map(|(j, o)| (j, b.x - o.x - 0.5 * (o.length + b.length)))
}

fn accel_behind(follower: &TrafficBody, leader: Option<(&TrafficBody, f64)>, idm: &IdmParams) -> f64 {
    let p = idm.with_v0(follower.v0);
    match leader {
        Some((l, gap)) => idm_acceleration(follower.v, follower.v - l.v, gap, &p),
        None => idm_acceleration(follower.v, 0.0, f64::INFINITY, &p),
    }
}

/// IDM acceleration of body `me` given the traffic around lateral position `y`.
pub fn idm_in_band(bodies: &[TrafficBody], me: usize, y: f64, band: f64, idm: &IdmParams) -> f64 {
    let leader = find_leader(bodies, me, y, band).map(|(j, g)| (&bodies[j], g));
    accel_behind(&bodies[me], leader, idm)
}

/// Evaluates MOBIL for the adjacent lanes of `lane` and returns the lane with
/// the largest incentive among those passing both criteria.
pub fn mobil_lane_choice(
    bodies: &[TrafficBody],
    me: usize,
    lane: u8,
    road: &RoadModel,
    idm: &IdmParams,
    mobil: &MobilParams,
) -> Option<(u8, f64)> {
    let band = road.lane_width / 2.0;
    let mut best: Option<(u8, f64)> = None;
    for target in [road.left_of(lane), road.right_of(lane)].into_iter().flatten() {
        let ty = road.lane_center(target);
        let Some(a) = lane_change_accels(bodies, me, ty, band, idm) else {
            continue;
        };
        if mobil_decision(&a, mobil) {
            let gain = mobil_incentive(&a, mobil);
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((target, gain));
            }
        }
    }
    best
}

/// Accelerations entering the MOBIL criteria for a move of `me` to lateral
/// position `ty`. `None` when the move would overlap a vehicle.
pub fn lane_change_accels(
    bodies: &[TrafficBody],
    me: usize,
    ty: f64,
    band: f64,
    idm: &IdmParams,
) -> Option<LaneChangeAccels> {
    let b = bodies[me];
    let cur_leader = find_leader(bodies, me, b.y, band);
    let new_leader = find_leader(bodies, me, ty, band);
    let new_follower = find_follower(bodies, me, ty, band);
    let old_follower = find_follower(bodies, me, b.y, band);
    if new_leader.is_some_and(|(_, g)| g <= 0.0) || new_follower.is_some_and(|(_, g)| g <= 0.0) {
        return None;
    }
    let with = |l: Option<(usize, f64)>| l.map(|(j, g)| (&bodies[j], g));

    let mut a = LaneChangeAccels {
        ego_current: accel_behind(&b, with(cur_leader), idm),
        ego_after: accel_behind(&b, with(new_leader), idm),
        ..Default::default()
    };
    if let Some((n, gap)) = new_follower {
        let nb = &bodies[n];
        // The new follower currently follows the new leader (if any).
        let current = new_leader.map(|(l, _)| {
            let lb = &bodies[l];
            (lb, lb.x - nb.x - 0.5 * (lb.length + nb.length))
        });
        a.new_follower_current = accel_behind(nb, current, idm);
        a.new_follower_after = accel_behind(nb, Some((&b, gap)), idm);
    }
    if let Some((o, gap)) = old_follower {
        let ob = &bodies[o];
        a.old_follower_current = accel_behind(ob, Some((&b, gap)), idm);
        let after = cur_leader.map(|(l, _)| {
            let lb = &bodies[l];
            (lb, lb.x - ob.x - 0.5 * (lb.length + ob.length))
        });
        a.old_follower_after = accel_behind(ob, after, idm);
    }
    Some(a)
}
