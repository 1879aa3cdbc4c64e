use crate::error::Result;
use crate::ingest::Scene;
use crate::sim::{find_leader, mobil_lane_choice, TrafficBody};
use crate::sim::{idm_acceleration, IdmParams, MobilParams, RoadModel};
use crate::trajectory::{solve_lateral, TrajPoint};

/// Straight-line extrapolation of the ego's initial velocity.
pub fn constant_velocity_predict(scene: &Scene) -> Vec<TrajPoint> {
    let k = scene.ego_init;
    let dt = scene.dt();
    (0..=scene.steps())
        .map(|i| {
            let t = i as f64 * dt;
            TrajPoint { t, x: k.x + k.vx * t, y: k.y + k.vy * t, vx: k.vx, vy: k.vy, ..Default::default() }
        })
        .collect()
}

/// One lane-change decision at `t = 0`, IDM along the horizon against the
/// logged vehicles ahead.
///
/// `idm.v0` is replaced by the ego's initial speed. A lane change is drawn as
/// a rest-to-rest quintic to the target lane center over the whole horizon.
pub fn idm_mobil_predict(scene: &Scene, road: &RoadModel, idm: &IdmParams, mobil: &MobilParams) -> Result<Vec<TrajPoint>> {
    let init = scene.ego_init;
    let idm = idm.with_v0(init.speed());
    let dt = scene.dt();
    let steps = scene.steps();
    let band = road.lane_width / 2.0;

    let bodies_at = |k: usize, ego: TrafficBody| {
        let mut b = vec![ego];
        for n in scene.neighbors.values() {
            if let Some(s) = n.state_at(k) {
                b.push(TrafficBody { x: s.x, y: s.y, v: s.vx, length: n.track.length, v0: s.vx });
            }
        }
        b
    };

    let ego0 = TrafficBody { x: init.x, y: init.y, v: init.vx, length: scene.ego_length, v0: idm.v0 };
    let lane = road.lane_at(init.x, init.y).unwrap_or(scene.ego_lane);
    let lateral = match mobil_lane_choice(&bodies_at(0, ego0), 0, lane, road, &idm, mobil) {
        Some((target, _)) => Some(solve_lateral(init.y, 0.0, 0.0, road.lane_center(target), 0.0, 0.0, scene.horizon)?),
        None => None,
    };

    let mut out = Vec::with_capacity(steps + 1);
    let (mut x, mut v) = (init.x, init.vx.max(0.0));
    for k in 0..=steps {
        let t = k as f64 * dt;
        let (y, vy, ay) = match &lateral {
            Some(p) => (p.eval(t, 0), p.eval(t, 1), p.eval(t, 2)),
            None => (init.y, 0.0, 0.0),
        };
        let me = TrafficBody { x, y, v, length: scene.ego_length, v0: idm.v0 };
        let bodies = bodies_at(k, me);
        let a = match find_leader(&bodies, 0, y, band) {
            Some((j, gap)) => idm_acceleration(v, v - bodies[j].v, gap, &idm),
            None => idm_acceleration(v, 0.0, f64::INFINITY, &idm),
        };
        out.push(TrajPoint { t, x, y, vx: v, vy, ax: a, ay, jx: 0.0 });
        let nv = (v + a * dt).max(0.0);
        x += 0.5 * (v + nv) * dt;
        v = nv;
    }
    Ok(out)
}
