//! Synthetic scenes and recordings with known ground truth.
//!
//! [`random_scene`] builds a highway scene with constant-speed neighbors,
//! [`label_with_boltzmann`] replaces each scene's recorded ego trajectory by
//! a candidate drawn from the Boltzmann distribution of a known reward, and
//! [`generate_traffic`] simulates a multi-lane recording in NGSIM layout.

use std::collections::BTreeMap;
use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{NormalizationConstants, FEATURE_COUNT};
use crate::ingest::{NeighborSlice, Scene, TrackState, VehicleTrack, FEET_TO_METERS};
use crate::irl::{candidate_distribution, Partition, RewardWeights, SceneBuffer, SceneEntry};
use crate::sampling::{evaluate_candidate, SamplingConfig};
use crate::sim::{idm_acceleration, IdmParams, RoadModel};
use crate::trajectory::generate_candidates;
use crate::{DT, HORIZON_STEPS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub min_neighbors: usize,
    pub max_neighbors: usize,
    pub ego_speed: (f64, f64),
    /// Neighbor speeds are the ego speed plus a uniform offset in this range.
    pub speed_offset: (f64, f64),
    /// Longitudinal placement of neighbors relative to the ego, meters.
    pub placement: (f64, f64),
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            min_neighbors: 2,
            max_neighbors: 6,
            ego_speed: (8.0, 20.0),
            speed_offset: (-3.0, 3.0),
            placement: (-30.0, 40.0),
        }
    }
}

fn constant_track(id: i64, x0: f64, y: f64, v: f64, lane: u8, length: f64) -> VehicleTrack {
    VehicleTrack {
        vehicle_id: id,
        first_frame: 0,
        dt: DT,
        states: (0..=HORIZON_STEPS)
            .map(|i| TrackState { x: x0 + v * i as f64 * DT, y, vx: v, vy: 0.0, ax: 0.0, ay: 0.0, lane_id: lane })
            .collect(),
        length,
        width: 1.8,
    }
}

/// A scene on a main lane with constant-speed neighbors in the ego lane and
/// the lanes beside it. Neighbors never start overlapping the ego or each
/// other.
pub fn random_scene<R: Rng>(rng: &mut R, scene_id: &str, road: &RoadModel, spec: &SceneSpec) -> Scene {
    let lane: u8 = rng.random_range(1..=5);
    let x0 = rng.random_range(150.0..250.0);
    let v = rng.random_range(spec.ego_speed.0..spec.ego_speed.1);
    let ego = constant_track(1, x0, road.lane_center(lane), v, lane, 4.5);

    let lanes: Vec<u8> = [road.left_of(lane), Some(lane), road.right_of(lane)].into_iter().flatten().collect();
    let count = rng.random_range(spec.min_neighbors..=spec.max_neighbors);
    let mut placed: Vec<(u8, f64)> = vec![(lane, x0)];
    let mut neighbors = BTreeMap::new();
    let mut id = 2;
    let mut attempts = 0;
    while neighbors.len() < count && attempts < 200 {
        attempts += 1;
        let l = lanes[rng.random_range(0..lanes.len())];
        let x = x0 + rng.random_range(spec.placement.0..spec.placement.1);
        if placed.iter().any(|&(pl, px)| pl == l && (px - x).abs() < 10.0) {
            continue;
        }
        let nv = (v + rng.random_range(spec.speed_offset.0..spec.speed_offset.1)).max(0.0);
        placed.push((l, x));
        let track = constant_track(id, x, road.lane_center(l), nv, l, 4.5);
        neighbors.insert(id, NeighborSlice { offset: 0, exits: false, track });
        id += 1;
    }
    Scene::from_parts(scene_id, ego, neighbors)
}

/// Scenes whose ego trajectory was drawn from a known reward, with the raw
/// feature buffer and the chosen candidate per scene.
#[derive(Debug, Clone)]
pub struct LabeledSet {
    pub scenes: Vec<Scene>,
    pub buffer: SceneBuffer,
    pub chosen: Vec<usize>,
    /// Constants under which `theta_true` was applied.
    pub normalization: NormalizationConstants,
}

/// Samples each scene's demonstration from `P(i) ∝ exp(θ·f_i)` over its
/// generated candidates, with features normalized across all scenes.
///
/// The scene's recorded ego trajectory becomes the chosen candidate's plan,
/// so refitting it reproduces that candidate.
pub fn label_with_boltzmann<R: Rng>(
    scenes: Vec<Scene>,
    theta_true: &[f64; FEATURE_COUNT],
    cfg: &SamplingConfig,
    rng: &mut R,
) -> Result<LabeledSet> {
    let mut per_scene = Vec::with_capacity(scenes.len());
    for s in &scenes {
        let cands = generate_candidates(s, &cfg.road, &cfg.space)?;
        let mut feats = Vec::with_capacity(cands.len());
        let mut ends = Vec::with_capacity(cands.len());
        for c in &cands {
            let (f, end, _) = evaluate_candidate(s, c, cfg)?;
            feats.push(f);
            ends.push(end);
        }
        per_scene.push((cands, feats, ends));
    }
    let norm = NormalizationConstants::fit(per_scene.iter().flat_map(|p| p.1.iter()))?;
    let mut w = RewardWeights::zero(false);
    w.theta = *theta_true;

    let mut out = LabeledSet { scenes: Vec::new(), buffer: SceneBuffer::default(), chosen: Vec::new(), normalization: norm };
    for (mut scene, (cands, feats, ends)) in scenes.into_iter().zip(per_scene) {
        let probe = SceneEntry {
            scene_id: scene.scene_id.clone(),
            demo: feats[0],
            candidates: feats.iter().map(|f| norm.apply(f)).collect(),
            candidate_endpoints: ends.clone(),
            gt_endpoint: (0.0, 0.0),
        };
        let p = candidate_distribution(&w, &probe, Partition::GeneratedOnly);
        let k = WeightedIndex::new(&p)
            .map_err(|e| Error::Numeric(format!("scene {}: {e}", scene.scene_id)))?
            .sample(rng);
        let plan = &cands[k].points;
        let gt = &mut scene.ego_ground_truth;
        for (st, pt) in gt.states.iter_mut().zip(plan) {
            st.x = pt.x;
            st.y = pt.y;
            st.vx = pt.vx;
            st.vy = pt.vy;
            st.ax = pt.ax;
            st.ay = pt.ay;
        }
        let last = plan.last().expect("candidate has points");
        out.buffer.entries.push(SceneEntry {
            scene_id: scene.scene_id.clone(),
            demo: feats[k],
            candidates: feats,
            candidate_endpoints: ends,
            gt_endpoint: (last.x, last.y),
        });
        out.chosen.push(k);
        out.scenes.push(scene);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficSpec {
    pub lanes: u8,
    pub vehicles_per_lane: usize,
    /// Length of every track, seconds.
    pub duration: f64,
    /// Mean speed of the lane leaders, m/s.
    pub mean_speed: f64,
    pub speed_amplitude: f64,
    /// Initial spacing between consecutive vehicles of a lane, meters.
    pub spacing: f64,
    /// Standard deviation of position noise added to the output, meters.
    pub position_noise: f64,
    /// Amplitude of the slow lateral drift inside the lane, meters.
    pub lateral_drift: f64,
}

impl Default for TrafficSpec {
    fn default() -> Self {
        Self {
            lanes: 5,
            vehicles_per_lane: 3,
            duration: 60.0,
            mean_speed: 7.0,
            speed_amplitude: 2.0,
            spacing: 25.0,
            position_noise: 0.02,
            lateral_drift: 0.3,
        }
    }
}

/// One NGSIM-layout row in meters, before unit conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficRow {
    pub vehicle_id: i64,
    pub frame_id: i64,
    /// Lateral.
    pub local_x: f64,
    /// Longitudinal.
    pub local_y: f64,
    pub length: f64,
    pub width: f64,
    pub speed: f64,
    pub accel: f64,
    pub lane_id: u8,
    pub preceding: i64,
    pub following: i64,
}

/// Simulates lane-bound car following: each lane leader follows a sinusoidal
/// speed profile and the vehicles behind it run IDM.
pub fn generate_traffic(spec: &TrafficSpec, seed: u64) -> Result<Vec<TrafficRow>> {
    if spec.lanes == 0 || spec.lanes > 5 || spec.vehicles_per_lane == 0 || !(spec.duration > 0.0) {
        return Err(Error::Config("traffic spec needs 1..=5 lanes, vehicles and a positive duration".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spec.position_noise.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
    let road = RoadModel::default();
    let frames = (spec.duration / DT).round() as usize;
    let idm = IdmParams::baseline(spec.mean_speed + spec.speed_amplitude);
    let mut rows = Vec::new();
    let mut next_id = 1i64;
    for lane in 1..=spec.lanes {
        let n = spec.vehicles_per_lane;
        let ids: Vec<i64> = (0..n).map(|i| next_id + i as i64).collect();
        next_id += n as i64;
        let lengths: Vec<f64> = (0..n).map(|_| rng.random_range(4.0..5.5)).collect();
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let period = rng.random_range(15.0..30.0);
        let drift_phase: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let lead_speed = |t: f64| spec.mean_speed + spec.speed_amplitude * (std::f64::consts::TAU * t / period + phase).sin();
        let head = 20.0 + (n - 1) as f64 * spec.spacing + rng.random_range(0.0..10.0);
        let mut x: Vec<f64> = (0..n).map(|i| head - i as f64 * spec.spacing).collect();
        let mut v: Vec<f64> = vec![lead_speed(0.0); n];
        for f in 0..=frames {
            let t = f as f64 * DT;
            let mut a = vec![0.0; n];
            a[0] = (lead_speed(t + DT) - v[0]) / DT;
            for i in 1..n {
                let gap = x[i - 1] - x[i] - 0.5 * (lengths[i - 1] + lengths[i]);
                a[i] = idm_acceleration(v[i], v[i] - v[i - 1], gap, &idm);
            }
            for i in 0..n {
                let y = road.lane_center(lane) + spec.lateral_drift * (0.2 * t + drift_phase[i]).sin();
                rows.push(TrafficRow {
                    vehicle_id: ids[i],
                    frame_id: f as i64 + 1,
                    local_x: y + noise.sample(&mut rng),
                    local_y: x[i] + noise.sample(&mut rng),
                    length: lengths[i],
                    width: 1.8,
                    speed: v[i],
                    accel: a[i],
                    lane_id: lane,
                    preceding: if i > 0 { ids[i - 1] } else { 0 },
                    following: if i + 1 < n { ids[i + 1] } else { 0 },
                });
            }
            for i in 0..n {
                let nv = (v[i] + a[i] * DT).max(0.0);
                x[i] += 0.5 * (v[i] + nv) * DT;
                v[i] = nv;
            }
        }
    }
    rows.sort_by_key(|r| (r.frame_id, r.vehicle_id));
    Ok(rows)
}

/// Writes rows in NGSIM column layout. Lengths are converted to feet when
/// `feet` is set.
pub fn write_ngsim_csv<W: Write>(w: W, rows: &[TrafficRow], feet: bool) -> Result<()> {
    let k = if feet { 1.0 / FEET_TO_METERS } else { 1.0 };
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "Vehicle_ID", "Frame_ID", "Total_Frames", "Global_Time", "Local_X", "Local_Y", "Global_X", "Global_Y",
        "v_Length", "v_Width", "v_Class", "v_Vel", "v_Acc", "Lane_ID", "Preceding", "Following", "Space_Headway",
        "Time_Headway",
    ])?;
    let mut totals: BTreeMap<i64, usize> = BTreeMap::new();
    for r in rows {
        *totals.entry(r.vehicle_id).or_default() += 1;
    }
    for r in rows {
        wtr.write_record([
            r.vehicle_id.to_string(),
            r.frame_id.to_string(),
            totals[&r.vehicle_id].to_string(),
            (r.frame_id * 100).to_string(),
            format!("{:.3}", r.local_x * k),
            format!("{:.3}", r.local_y * k),
            "0".into(),
            "0".into(),
            format!("{:.1}", r.length * k),
            format!("{:.1}", r.width * k),
            "2".into(),
            format!("{:.2}", r.speed * k),
            format!("{:.2}", r.accel * k),
            r.lane_id.to_string(),
            r.preceding.to_string(),
            r.following.to_string(),
            "0".into(),
            "0".into(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
