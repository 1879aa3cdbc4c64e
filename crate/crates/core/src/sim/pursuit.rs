use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::VehicleState;
use crate::trajectory::TrajPoint;

/// Tracking controller settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerParams {
    pub lookahead_min: f64,
    /// Lookahead distance per unit speed, s.
    pub lookahead_time: f64,
    /// Proportional gain on the speed error, 1/s.
    pub speed_gain: f64,
    /// How far ahead the reference speed is read, s. With `1 / speed_gain`
    /// the loop has no steady-state lag on constant-acceleration references.
    pub speed_preview: f64,
    pub max_steer: f64,
    pub accel_min: f64,
    pub accel_max: f64,
    /// Wheelbase as a fraction of vehicle length.
    pub wheelbase_ratio: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            lookahead_min: 4.0,
            lookahead_time: 0.8,
            speed_gain: 2.0,
            speed_preview: 0.5,
            max_steer: 0.6,
            accel_min: -9.0,
            accel_max: 5.0,
            wheelbase_ratio: 0.6,
        }
    }
}

/// Reference point at time `t`, linearly interpolated between samples.
/// Past the last sample the final velocity is held.
pub fn reference_at(reference: &[TrajPoint], t: f64) -> TrajPoint {
    let first = reference[0];
    if t <= first.t {
        return first;
    }
    let last = reference[reference.len() - 1];
    if t >= last.t {
        let dt = t - last.t;
        return TrajPoint {
            t,
            x: last.x + last.vx * dt,
            y: last.y + last.vy * dt,
            ax: 0.0,
            ay: 0.0,
            jx: 0.0,
            ..last
        };
    }
    let i = reference.partition_point(|p| p.t <= t) - 1;
    let (a, b) = (reference[i], reference[i + 1]);
    let u = (t - a.t) / (b.t - a.t);
    let lerp = |p: f64, q: f64| p + (q - p) * u;
    TrajPoint {
        t,
        x: lerp(a.x, b.x),
        y: lerp(a.y, b.y),
        vx: lerp(a.vx, b.vx),
        vy: lerp(a.vy, b.vy),
        ax: lerp(a.ax, b.ax),
        ay: lerp(a.ay, b.ay),
        jx: lerp(a.jx, b.jx),
    }
}

/// First point along the reference polyline, from time `t` on, that lies
/// `ld` away from `(px, py)`. Beyond the last sample the polyline continues
/// along the final velocity.
fn lookahead_point(reference: &[TrajPoint], t: f64, px: f64, py: f64, ld: f64) -> (f64, f64) {
    let dist = |x: f64, y: f64| (x - px).hypot(y - py);
    let start = reference_at(reference, t);
    if dist(start.x, start.y) >= ld {
        return (start.x, start.y);
    }
    let mut prev = (start.x, start.y);
    let first_idx = reference.partition_point(|p| p.t <= t);
    for p in &reference[first_idx..] {
        if dist(p.x, p.y) >= ld {
            return circle_hit(prev, (p.x, p.y), px, py, ld);
        }
        prev = (p.x, p.y);
    }
    let last = reference[reference.len() - 1];
    let speed = last.vx.hypot(last.vy);
    if speed < 1e-9 {
        return (last.x, last.y);
    }
    let far = (last.x + last.vx / speed * 2.0 * ld, last.y + last.vy / speed * 2.0 * ld);
    circle_hit(prev, far, px, py, ld)
}

/// Point on segment `a → b` at distance `ld` from `(px, py)`, given `a` is
/// inside the circle and `b` outside.
fn circle_hit(a: (f64, f64), b: (f64, f64), px: f64, py: f64, ld: f64) -> (f64, f64) {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let (fx, fy) = (a.0 - px, a.1 - py);
    let qa = dx * dx + dy * dy;
    if qa < 1e-18 {
        return b;
    }
    let qb = 2.0 * (fx * dx + fy * dy);
    let qc = fx * fx + fy * fy - ld * ld;
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
    let u = ((-qb + disc.sqrt()) / (2.0 * qa)).clamp(0.0, 1.0);
    (a.0 + u * dx, a.1 + u * dy)
}

/// Steering toward a lookahead point on the reference and proportional
/// speed tracking. Positive steer turns toward increasing `y`.
pub fn pure_pursuit_step(
    state: &VehicleState,
    reference: &[TrajPoint],
    t: f64,
    p: &ControllerParams,
) -> (f64, f64) {
    let ld = (p.lookahead_time * state.speed).max(p.lookahead_min);
    let (tx, ty) = lookahead_point(reference, t, state.x, state.y, ld);
    let (dx, dy) = (tx - state.x, ty - state.y);
    let actual = dx.hypot(dy);
    let steer = if actual < 1e-9 {
        0.0
    } else {
        let alpha = wrap_angle(dy.atan2(dx) - state.heading);
        let wheelbase = p.wheelbase_ratio * state.length;
        (2.0 * wheelbase * alpha.sin()).atan2(actual)
    };
    let v_ref = reference_at(reference, t + p.speed_preview).speed();
    let accel = p.speed_gain * (v_ref - state.speed);
    (
        steer.clamp(-p.max_steer, p.max_steer),
        accel.clamp(p.accel_min, p.accel_max),
    )
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a < -PI {
        a += 2.0 * PI;
    }
    a
}

/// Kinematic bicycle update using the speed at the start of the step.
pub fn bicycle_step(state: &VehicleState, steer: f64, accel: f64, dt: f64, wheelbase: f64) -> VehicleState {
    let v = state.speed;
    VehicleState {
        x: state.x + v * state.heading.cos() * dt,
        y: state.y + v * state.heading.sin() * dt,
        heading: state.heading + v / wheelbase * steer.tan() * dt,
        speed: (v + accel * dt).max(0.0),
        accel,
        ..*state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Kinematics;
    use crate::sim::VehicleMode;
    use crate::trajectory::{CandidateTrajectory, PolynomialPair, TargetState, TrajectorySource};

    fn car(x: f64, y: f64, v: f64) -> VehicleState {
        VehicleState { x, y, heading: 0.0, speed: v, accel: 0.0, length: 4.7, width: 1.8, mode: VehicleMode::Ego }
    }

    fn plan(v: f64, y0: f64, ye: f64, vxe: f64) -> CandidateTrajectory {
        let init = Kinematics { x: 0.0, y: y0, vx: v, vy: 0.0, ax: 0.0, ay: 0.0 };
        let target = TargetState { vxe, axe: 0.0, ye, vye: 0.0, aye: 0.0 };
        CandidateTrajectory::from_poly(
            PolynomialPair::solve(&init, &target, 5.0).unwrap(),
            TrajectorySource::Generated,
            Some(target),
        )
    }

    fn track(reference: &CandidateTrajectory, mut s: VehicleState) -> VehicleState {
        let p = ControllerParams::default();
        for k in 0..50 {
            let (steer, accel) = pure_pursuit_step(&s, &reference.points, k as f64 * 0.1, &p);
            s = bicycle_step(&s, steer, accel, 0.1, p.wheelbase_ratio * s.length);
        }
        s
    }

    #[test]
    fn on_reference_no_correction() {
        let r = plan(10.0, 5.49, 5.49, 10.0);
        let (steer, accel) = pure_pursuit_step(&car(0.0, 5.49, 10.0), &r.points, 0.0, &ControllerParams::default());
        assert_eq!(steer, 0.0);
        assert!(accel.abs() < 1e-12);
    }

    #[test]
    fn lateral_offset_steers_back() {
        let r = plan(10.0, 5.49, 5.49, 10.0);
        let (steer, _) = pure_pursuit_step(&car(0.0, 5.99, 10.0), &r.points, 0.0, &ControllerParams::default());
        assert!(steer < 0.0);
        let (steer, _) = pure_pursuit_step(&car(0.0, 4.99, 10.0), &r.points, 0.0, &ControllerParams::default());
        assert!(steer > 0.0);
    }

    #[test]
    fn lane_change_is_tracked_within_tolerance() {
        for v in [5.0, 10.0, 15.0, 25.0] {
            for (y0, ye) in [(5.49, 9.15), (5.49, 1.83)] {
                let r = plan(v, y0, ye, v);
                let end = track(&r, car(0.0, y0, v));
                let err = (end.y - r.last().y).abs();
                assert!(err < 0.3, "v={v} ye={ye}: lateral error {err}");
            }
        }
    }

    #[test]
    fn speed_change_is_tracked() {
        let r = plan(10.0, 5.49, 5.49, 15.0);
        let end = track(&r, car(0.0, 5.49, 10.0));
        assert!((end.speed - 15.0).abs() < 0.3, "final speed {}", end.speed);
        assert!((end.x - r.last().x).abs() < 1.0, "final x {} vs {}", end.x, r.last().x);
    }

    #[test]
    fn bicycle_straight_line() {
        let s = bicycle_step(&car(0.0, 2.0, 10.0), 0.0, 0.0, 0.1, 2.8);
        assert!((s.x - 1.0).abs() < 1e-12);
        assert_eq!((s.y, s.heading, s.speed), (2.0, 0.0, 10.0));
    }

    #[test]
    fn bicycle_at_rest_only_integrates_speed() {
        let s = bicycle_step(&car(3.0, 2.0, 0.0), 0.4, 1.5, 0.1, 2.8);
        assert_eq!((s.x, s.y, s.heading), (3.0, 2.0, 0.0));
        assert!((s.speed - 0.15).abs() < 1e-12);
        let s = bicycle_step(&car(3.0, 2.0, 0.0), 0.4, -1.5, 0.1, 2.8);
        assert_eq!(s.speed, 0.0);
    }

    #[test]
    fn bicycle_heading_rate() {
        let s = bicycle_step(&car(0.0, 0.0, 10.0), 0.1, 0.0, 0.1, 2.8);
        let want = 10.0 / 2.8 * 0.1f64.tan() * 0.1;
        assert!((s.heading - want).abs() < 1e-15);
    }

    #[test]
    fn reference_holds_final_velocity_past_the_end() {
        let r = plan(10.0, 5.49, 5.49, 12.0);
        let p = reference_at(&r.points, 6.0);
        assert!((p.x - (r.last().x + 12.0)).abs() < 1e-9);
        let mid = reference_at(&r.points, 0.05);
        assert!(mid.x > r.points[0].x && mid.x < r.points[1].x);
    }
}
