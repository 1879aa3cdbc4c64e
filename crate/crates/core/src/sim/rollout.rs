use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{find_leader, mobil_lane_choice, TrafficBody};
use super::{
    bicycle_step, collision_check, curb_collision, idm_acceleration, pure_pursuit_step, ControllerParams,
    EnvMode, IdmParams, MobilParams, RoadModel, VehicleMode, VehicleState,
};
use crate::error::{Error, Result};
use crate::ingest::{Scene, TrackState};
use crate::trajectory::{solve_lateral, CandidateTrajectory, Polynomial, TrajPoint};
use crate::INTERACTION_RANGE;

/// Desired speed of a vehicle once it is overridden by IDM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum V0Policy {
    /// Speed at the moment of override.
    #[default]
    FrozenAtOverride,
    /// Current speed at every step.
    Current,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub mode: EnvMode,
    /// Reaction model of overridden vehicles; `v0` is set per vehicle.
    pub reaction: IdmParams,
    /// Car-following model of forecast mode; `v0` is each vehicle's initial speed.
    pub forecast_idm: IdmParams,
    pub forecast_mobil: MobilParams,
    pub controller: ControllerParams,
    pub interaction_range: f64,
    pub v0_policy: V0Policy,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            mode: EnvMode::ReactiveReplay,
            reaction: IdmParams::training(0.0),
            forecast_idm: IdmParams::baseline(0.0),
            forecast_mobil: MobilParams::default(),
            controller: ControllerParams::default(),
            interaction_range: INTERACTION_RANGE,
            v0_policy: V0Policy::FrozenAtOverride,
        }
    }
}

impl EnvConfig {
    pub fn with_mode(mode: EnvMode) -> Self {
        Self { mode, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Collision {
    None,
    WithVehicle { vehicle_id: i64, step: usize, t: f64 },
    WithCurb { step: usize, t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverrideEvent {
    pub vehicle_id: i64,
    pub step: usize,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutResult {
    pub ego_states: Vec<VehicleState>,
    /// The plan the ego tracked, with analytic derivatives.
    pub ego_plan: Vec<TrajPoint>,
    /// `None` where a vehicle is absent (not yet logged, or left the road).
    pub neighbor_states: BTreeMap<i64, Vec<Option<VehicleState>>>,
    pub override_events: Vec<OverrideEvent>,
    pub collision: Collision,
    /// Per step, the accelerations of vehicles under IDM override.
    pub influenced_decels: Vec<BTreeMap<i64, f64>>,
}

impl RolloutResult {
    pub fn steps(&self) -> usize {
        self.ego_states.len().saturating_sub(1)
    }

    /// First step at which the ego is in collision.
    pub fn collision_step(&self) -> Option<usize> {
        match self.collision {
            Collision::None => None,
            Collision::WithVehicle { step, .. } | Collision::WithCurb { step, .. } => Some(step),
        }
    }

    pub fn ego_end(&self) -> (f64, f64) {
        let s = self.ego_states.last().expect("rollout has states");
        (s.x, s.y)
    }

    pub fn neighbor_at(&self, id: i64, step: usize) -> Option<&VehicleState> {
        self.neighbor_states.get(&id).and_then(|v| v[step].as_ref())
    }
}

struct Agent {
    id: i64,
    state: Option<VehicleState>,
    v0: f64,
    frozen: bool,
    lane_shift: Option<Polynomial<6>>,
}

fn replay_state(s: &TrackState, length: f64, width: f64) -> VehicleState {
    let k = s.kinematics();
    VehicleState {
        x: s.x,
        y: s.y,
        heading: k.heading(),
        speed: k.speed(),
        accel: s.ax,
        length,
        width,
        mode: VehicleMode::Replay,
    }
}

fn body_of(s: &VehicleState, v0: f64) -> TrafficBody {
    TrafficBody { x: s.x, y: s.y, v: s.vx(), length: s.length, v0 }
}

/// Simulates the ego tracking `candidate` through the scene.
///
/// Step `k` of every output sequence is the state at `t = k·dt`; the
/// recorded accelerations are those applied from `k` to `k + 1`.
pub fn rollout(
    scene: &Scene,
    candidate: &CandidateTrajectory,
    road: &RoadModel,
    env: &EnvConfig,
) -> Result<RolloutResult> {
    let steps = scene.steps();
    if candidate.points.len() != steps + 1 {
        return Err(Error::Config(format!(
            "scene {}: candidate has {} points, scene horizon needs {}",
            scene.scene_id,
            candidate.points.len(),
            steps + 1
        )));
    }
    let dt = scene.dt();
    if env.mode == EnvMode::Forecast
        && !scene.neighbors.is_empty()
        && scene.neighbors.values().all(|n| n.state_at(0).is_none())
    {
        return Err(Error::Config(format!(
            "scene {}: forecast mode needs initial neighbor states, none are present at t=0",
            scene.scene_id
        )));
    }

    let init = scene.ego_init;
    let mut ego = VehicleState {
        x: init.x,
        y: init.y,
        heading: init.heading(),
        speed: init.speed(),
        accel: init.ax,
        length: scene.ego_length,
        width: scene.ego_width,
        mode: VehicleMode::Ego,
    };
    let wheelbase = env.controller.wheelbase_ratio * scene.ego_length;

    let mut agents: Vec<Agent> = scene
        .neighbors
        .iter()
        .map(|(&id, slice)| {
            let state = slice
                .state_at(0)
                .filter(|s| s.x <= road.length)
                .map(|s| replay_state(s, slice.track.length, slice.track.width));
            Agent { id, v0: state.map_or(0.0, |s| s.speed), state, frozen: false, lane_shift: None }
        })
        .collect();
    if env.mode == EnvMode::Forecast {
        for a in agents.iter_mut() {
            if let Some(s) = a.state.as_mut() {
                s.mode = VehicleMode::Forecast;
                s.heading = 0.0;
            }
        }
        plan_forecast_lane_changes(&mut agents, &ego, road, env, scene.horizon)?;
    }

    let mut result = RolloutResult {
        ego_states: Vec::with_capacity(steps + 1),
        ego_plan: candidate.points.clone(),
        neighbor_states: agents.iter().map(|a| (a.id, Vec::with_capacity(steps + 1))).collect(),
        override_events: Vec::new(),
        collision: Collision::None,
        influenced_decels: Vec::with_capacity(steps + 1),
    };
    detect_collision(&ego, &mut agents, road, 0, 0.0, &mut result.collision);

    let band = road.lane_width / 2.0;
    for k in 0..=steps {
        let t = candidate.points[k].t;

        // Snapshot: body 0 is the ego, body i + 1 is agent i. Absent agents
        // are parked out of every lane band.
        let mut visible = Vec::with_capacity(agents.len() + 1);
        visible.push(body_of(&ego, ego.speed));
        for a in &agents {
            visible.push(match &a.state {
                Some(s) => body_of(s, a.v0),
                None => TrafficBody { x: f64::NEG_INFINITY, y: f64::INFINITY, v: 0.0, length: 0.0, v0: 0.0 },
            });
        }

        if env.mode != EnvMode::FixedReplay {
            trigger_overrides(&mut agents, &visible, &ego, env, band, k, t, &mut result.override_events);
        }

        let mut influenced = BTreeMap::new();
        for (i, a) in agents.iter_mut().enumerate() {
            let Some(s) = a.state.as_mut() else { continue };
            if a.frozen {
                s.accel = 0.0;
                continue;
            }
            let params = match s.mode {
                VehicleMode::IdmOverride if env.mode != EnvMode::Forecast => {
                    let v0 = match env.v0_policy {
                        V0Policy::FrozenAtOverride => a.v0,
                        V0Policy::Current => s.speed,
                    };
                    env.reaction.with_v0(v0)
                }
                VehicleMode::IdmOverride | VehicleMode::Forecast => env.forecast_idm.with_v0(a.v0),
                _ => continue,
            };
            let me = i + 1;
            let accel = match find_leader(&visible, me, s.y, band) {
                Some((j, gap)) => idm_acceleration(s.speed, s.speed - visible[j].v, gap, &params),
                None => idm_acceleration(s.speed, 0.0, f64::INFINITY, &params),
            };
            s.accel = accel;
            if s.mode == VehicleMode::IdmOverride {
                influenced.insert(a.id, accel);
            }
        }

        let control = (k < steps).then(|| pure_pursuit_step(&ego, &candidate.points, t, &env.controller));
        if let Some((_, accel)) = control {
            ego.accel = accel;
        }

        result.ego_states.push(ego);
        for a in &agents {
            result.neighbor_states.get_mut(&a.id).expect("agent registered").push(a.state);
        }
        result.influenced_decels.push(influenced);

        let Some((steer, accel)) = control else { break };
        let next_t = candidate.points[k + 1].t;
        ego = bicycle_step(&ego, steer, accel, dt, wheelbase);
        for a in agents.iter_mut() {
            advance_agent(a, scene, road, k + 1, next_t, dt);
        }
        if result.collision == Collision::None {
            detect_collision(&ego, &mut agents, road, k + 1, next_t, &mut result.collision);
        }
    }
    Ok(result)
}

#[allow(clippy::too_many_arguments)]
fn trigger_overrides(
    agents: &mut [Agent],
    bodies: &[TrafficBody],
    ego: &VehicleState,
    env: &EnvConfig,
    band: f64,
    step: usize,
    t: f64,
    events: &mut Vec<OverrideEvent>,
) {
    // Front to back, so a vehicle overridden now can pull its follower in
    // during the same step.
    let mut order: Vec<usize> = (0..agents.len()).filter(|&i| agents[i].state.is_some()).collect();
    order.sort_by(|&a, &b| bodies[b + 1].x.total_cmp(&bodies[a + 1].x));
    for i in order {
        let a = &agents[i];
        let s = a.state.expect("filtered on presence");
        let eligible = match env.mode {
            EnvMode::ReactiveReplay => s.mode == VehicleMode::Replay,
            EnvMode::Forecast => s.mode == VehicleMode::Forecast,
            EnvMode::FixedReplay => false,
        };
        if !eligible || a.frozen || (s.x - ego.x).abs() > env.interaction_range {
            continue;
        }
        let Some((j, gap)) = find_leader(bodies, i + 1, s.y, band) else { continue };
        let leader_influences = j == 0 || agents[j - 1].state.is_some_and(|l| l.mode == VehicleMode::IdmOverride);
        if !leader_influences {
            continue;
        }
        let params = match env.mode {
            EnvMode::Forecast => env.forecast_idm,
            _ => env.reaction,
        };
        if gap < params.desired_gap(s.speed, s.speed - bodies[j].v) {
            let a = &mut agents[i];
            let st = a.state.as_mut().expect("present");
            st.mode = VehicleMode::IdmOverride;
            if env.mode != EnvMode::Forecast {
                a.v0 = st.speed;
                // Longitudinal response only: lateral position stays put.
                st.heading = 0.0;
            }
            events.push(OverrideEvent { vehicle_id: a.id, step, t });
        }
    }
}

fn advance_agent(a: &mut Agent, scene: &Scene, road: &RoadModel, step: usize, t: f64, dt: f64) {
    let Some(s) = a.state else { return };
    if a.frozen {
        return;
    }
    let next = match s.mode {
        VehicleMode::Replay => {
            let slice = &scene.neighbors[&a.id];
            slice.state_at(step).map(|ts| replay_state(ts, s.length, s.width))
        }
        _ => {
            let speed = (s.speed + s.accel * dt).max(0.0);
            let x = s.x + 0.5 * (s.speed + speed) * dt;
            let (y, heading) = match &a.lane_shift {
                Some(p) if s.mode == VehicleMode::Forecast || s.mode == VehicleMode::IdmOverride => {
                    let vy = p.eval(t, 1);
                    (p.eval(t, 0), if speed > 0.0 { vy.atan2(speed) } else { 0.0 })
                }
                _ => (s.y, s.heading),
            };
            Some(VehicleState { x, y, heading, speed, ..s })
        }
    };
    a.state = next.filter(|n| n.x <= road.length);
}

fn detect_collision(
    ego: &VehicleState,
    agents: &mut [Agent],
    road: &RoadModel,
    step: usize,
    t: f64,
    latch: &mut Collision,
) {
    if *latch != Collision::None {
        return;
    }
    for a in agents.iter_mut() {
        if let Some(s) = a.state.as_mut() {
            if collision_check(ego, s) {
                a.frozen = true;
                s.speed = 0.0;
                s.accel = 0.0;
                *latch = Collision::WithVehicle { vehicle_id: a.id, step, t };
                return;
            }
        }
    }
    if curb_collision(ego, road) {
        *latch = Collision::WithCurb { step, t };
    }
}

/// One MOBIL decision per forecast vehicle at `t = 0`; a lane change is
/// rendered as a rest-to-rest quintic over the horizon.
fn plan_forecast_lane_changes(
    agents: &mut [Agent],
    ego: &VehicleState,
    road: &RoadModel,
    env: &EnvConfig,
    horizon: f64,
) -> Result<()> {
    let mut bodies = vec![body_of(ego, ego.speed)];
    let mut index = Vec::new();
    for (i, a) in agents.iter().enumerate() {
        if let Some(s) = &a.state {
            index.push((i, bodies.len()));
            bodies.push(body_of(s, a.v0));
        }
    }
    for (i, b) in index {
        let s = agents[i].state.expect("indexed agents are present");
        let Some(lane) = road.lane_at(s.x, s.y) else { continue };
        if let Some((target, _)) = mobil_lane_choice(&bodies, b, lane, road, &env.forecast_idm, &env.forecast_mobil) {
            let ty = road.lane_center(target);
            agents[i].lane_shift = Some(solve_lateral(s.y, 0.0, 0.0, ty, 0.0, 0.0, horizon)?);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TraceStep<'a> {
    step: usize,
    t: f64,
    ego: &'a VehicleState,
    neighbors: BTreeMap<i64, &'a VehicleState>,
    overridden: Vec<i64>,
    collision: bool,
}

/// One JSON line per step with every vehicle state, override flags and the
/// latched collision flag.
pub fn write_trace_jsonl<W: Write>(mut w: W, r: &RolloutResult) -> Result<()> {
    let hit = r.collision_step();
    for (k, ego) in r.ego_states.iter().enumerate() {
        let neighbors: BTreeMap<i64, &VehicleState> = r
            .neighbor_states
            .iter()
            .filter_map(|(&id, v)| v[k].as_ref().map(|s| (id, s)))
            .collect();
        let overridden = neighbors
            .iter()
            .filter(|(_, s)| s.mode == VehicleMode::IdmOverride)
            .map(|(&id, _)| id)
            .collect();
        let row = TraceStep {
            step: k,
            t: r.ego_plan[k].t,
            ego,
            neighbors,
            overridden,
            collision: hit.is_some_and(|h| k >= h),
        };
        serde_json::to_writer(&mut w, &row)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{NeighborSlice, TrackState, VehicleTrack};
    use crate::trajectory::{PolynomialPair, TargetState, TrajectorySource};
    use proptest::prelude::*;

    fn lane_y(lane: u8) -> f64 {
        RoadModel::default().lane_center(lane)
    }

    fn straight(id: i64, n: usize, x0: f64, v: f64, lane: u8) -> VehicleTrack {
        VehicleTrack {
            vehicle_id: id,
            first_frame: 0,
            dt: 0.1,
            states: (0..n)
                .map(|i| TrackState {
                    x: x0 + v * i as f64 * 0.1,
                    y: lane_y(lane),
                    vx: v,
                    vy: 0.0,
                    ax: 0.0,
                    ay: 0.0,
                    lane_id: lane,
                })
                .collect(),
            length: 4.5,
            width: 1.8,
        }
    }

    fn scene(ego: VehicleTrack, others: Vec<VehicleTrack>) -> Scene {
        let neighbors = others
            .into_iter()
            .map(|t| (t.vehicle_id, NeighborSlice { offset: 0, exits: false, track: t }))
            .collect();
        Scene::from_parts("t-00", ego, neighbors)
    }

    fn plan(scene: &Scene, vxe: f64, lane: u8) -> CandidateTrajectory {
        let target = TargetState { vxe, axe: 0.0, ye: lane_y(lane), vye: 0.0, aye: 0.0 };
        let poly = PolynomialPair::solve(&scene.ego_init, &target, scene.horizon).unwrap();
        CandidateTrajectory::from_poly(poly, TrajectorySource::Generated, Some(target))
    }

    fn run(scene: &Scene, cand: &CandidateTrajectory, mode: EnvMode) -> RolloutResult {
        rollout(scene, cand, &RoadModel::default(), &EnvConfig::with_mode(mode)).unwrap()
    }

    #[test]
    fn empty_world_tracks_the_plan() {
        let s = scene(straight(1, 51, 100.0, 20.0, 2), vec![]);
        let r = run(&s, &plan(&s, 20.0, 2), EnvMode::ReactiveReplay);
        assert_eq!(r.ego_states.len(), 51);
        assert_eq!(r.collision, Collision::None);
        let (x, y) = r.ego_end();
        assert!((x - 200.0).abs() < 1e-6 && (y - lane_y(2)).abs() < 1e-9);
        assert!(r.influenced_decels.iter().all(|m| m.is_empty()));
    }

    #[test]
    fn point_count_mismatch_is_config_error() {
        let s = scene(straight(1, 51, 100.0, 20.0, 2), vec![]);
        let mut c = plan(&s, 20.0, 2);
        c.points.pop();
        assert!(matches!(
            rollout(&s, &c, &RoadModel::default(), &EnvConfig::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn forecast_without_initial_neighbors_is_config_error() {
        let mut late = straight(2, 20, 130.0, 20.0, 2);
        late.first_frame = 30;
        let mut s = scene(straight(1, 51, 100.0, 20.0, 2), vec![]);
        s.neighbors.insert(2, NeighborSlice { offset: 30, exits: false, track: late });
        let c = plan(&s, 20.0, 2);
        assert!(matches!(
            rollout(&s, &c, &RoadModel::default(), &EnvConfig::with_mode(EnvMode::Forecast)),
            Err(Error::Config(_))
        ));
        assert!(rollout(&s, &c, &RoadModel::default(), &EnvConfig::default()).is_ok());
    }

    #[test]
    fn fixed_replay_reproduces_logs_exactly() {
        let lead = straight(2, 51, 115.0, 24.0, 2);
        let s = scene(straight(1, 51, 100.0, 20.0, 2), vec![lead.clone(), straight(3, 51, 80.0, 25.0, 3)]);
        let r = run(&s, &plan(&s, 20.0, 3), EnvMode::FixedReplay);
        assert!(r.override_events.is_empty());
        for k in 0..=50 {
            let n = r.neighbor_at(2, k).unwrap();
            assert_eq!(n.x, lead.states[k].x);
            assert!(r.influenced_decels[k].is_empty());
        }
    }

    #[test]
    fn cut_in_overrides_the_new_follower() {
        // Ego moves from lane 2 into lane 3, ahead of a vehicle 12 m behind.
        let follower = straight(2, 51, 88.0, 22.0, 3);
        let s = scene(straight(1, 51, 100.0, 20.0, 2), vec![follower]);
        let r = run(&s, &plan(&s, 20.0, 3), EnvMode::ReactiveReplay);
        let ev = r.override_events.iter().find(|e| e.vehicle_id == 2).expect("follower reacts");
        assert!(ev.step > 0);
        let decel = r.influenced_decels.iter().filter_map(|m| m.get(&2)).cloned().fold(0.0, f64::min);
        assert!(decel < -0.5, "strongest reaction {decel}");
        assert_eq!(r.neighbor_at(2, 50).unwrap().mode, VehicleMode::IdmOverride);
        // Lateral position is held after the override.
        assert_eq!(r.neighbor_at(2, 50).unwrap().y, lane_y(3));
    }

    #[test]
    fn braking_ego_overrides_a_chain_of_followers() {
        let a = straight(2, 51, 88.0, 20.0, 2);
        let b = straight(3, 51, 76.0, 20.0, 2);
        let s = scene(straight(1, 51, 100.0, 20.0, 2), vec![a, b]);
        let r = run(&s, &plan(&s, 8.0, 2), EnvMode::ReactiveReplay);
        let step_of = |id| r.override_events.iter().find(|e| e.vehicle_id == id).map(|e| e.step);
        let (sa, sb) = (step_of(2).expect("first follower"), step_of(3).expect("second follower"));
        assert!(sa <= sb);
        assert_eq!(r.collision, Collision::None);
        // Without reactions the same plan is rear-ended.
        let fixed = run(&s, &plan(&s, 8.0, 2), EnvMode::FixedReplay);
        assert!(matches!(fixed.collision, Collision::WithVehicle { .. }));
    }

    #[test]
    fn collision_is_latched_and_freezes_the_other_vehicle() {
        let stopped = straight(2, 51, 140.0, 0.0, 2);
        let s = scene(straight(1, 51, 100.0, 15.0, 2), vec![stopped]);
        let r = run(&s, &plan(&s, 15.0, 2), EnvMode::ReactiveReplay);
        let Collision::WithVehicle { vehicle_id, step, t } = r.collision else {
            panic!("expected collision, got {:?}", r.collision)
        };
        assert_eq!(vehicle_id, 2);
        assert!((t - step as f64 * 0.1).abs() < 1e-9);
        for k in step..=50 {
            assert_eq!(r.neighbor_at(2, k).unwrap().speed, 0.0);
        }
        assert_eq!(r.collision_step(), Some(step));
    }

    #[test]
    fn curb_is_a_collision() {
        let s = scene(straight(1, 51, 100.0, 20.0, 1), vec![]);
        let target = TargetState { vxe: 20.0, axe: 0.0, ye: -2.0, vye: 0.0, aye: 0.0 };
        let poly = PolynomialPair::solve(&s.ego_init, &target, 5.0).unwrap();
        let c = CandidateTrajectory::from_poly(poly, TrajectorySource::Generated, Some(target));
        let r = run(&s, &c, EnvMode::ReactiveReplay);
        assert!(matches!(r.collision, Collision::WithCurb { .. }));
    }

    #[test]
    fn replay_vehicle_leaving_the_road_becomes_absent() {
        let exiting = straight(2, 51, 630.0, 20.0, 3);
        let s = scene(straight(1, 51, 400.0, 20.0, 2), vec![exiting]);
        let r = run(&s, &plan(&s, 20.0, 2), EnvMode::ReactiveReplay);
        assert!(r.neighbor_at(2, 0).is_some());
        assert!(r.neighbor_at(2, 50).is_none());
    }

    #[test]
    fn forecast_neighbors_follow_idm() {
        let lead = straight(2, 51, 130.0, 10.0, 2);
        let s = scene(straight(1, 51, 100.0, 10.0, 2), vec![lead]);
        let r = run(&s, &plan(&s, 10.0, 2), EnvMode::Forecast);
        let n = r.neighbor_at(2, 0).unwrap();
        assert_eq!(n.mode, VehicleMode::Forecast);
        // Free road ahead at v0 = current speed: stays at speed.
        assert!((r.neighbor_at(2, 50).unwrap().speed - 10.0).abs() < 1e-6);
    }

    #[test]
    fn rollouts_are_deterministic() {
        let s = scene(
            straight(1, 51, 100.0, 20.0, 2),
            vec![straight(2, 51, 88.0, 22.0, 3), straight(3, 51, 130.0, 15.0, 2)],
        );
        let c = plan(&s, 18.0, 3);
        let a = run(&s, &c, EnvMode::ReactiveReplay);
        let b = run(&s, &c, EnvMode::ReactiveReplay);
        assert_eq!(a, b);
        let (mut ta, mut tb) = (Vec::new(), Vec::new());
        write_trace_jsonl(&mut ta, &a).unwrap();
        write_trace_jsonl(&mut tb, &b).unwrap();
        assert_eq!(ta, tb);
        assert_eq!(String::from_utf8(ta).unwrap().lines().count(), 51);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        /// Overridden followers never run into the ego when the ego keeps a
        /// constant speed in their lane with a gap that the braking limit
        /// can close.
        #[test]
        fn overridden_followers_do_not_rear_end(
            v_ego in 5.0f64..30.0,
            v_f in 5.0f64..30.0,
            gap in 15.0f64..45.0,
        ) {
            let closing = (v_f - v_ego).max(0.0);
            prop_assume!(gap > closing * closing / (2.0 * 9.0) + 0.1 * closing + 2.0);
            let follower = straight(2, 51, 100.0 - 4.5 - gap, v_f, 2);
            let s = scene(straight(1, 51, 100.0, v_ego, 2), vec![follower]);
            let r = run(&s, &plan(&s, v_ego, 2), EnvMode::ReactiveReplay);
            prop_assert_eq!(r.collision, Collision::None);
        }
    }
}
