//! Polynomial candidate trajectories.
//!
//! A plan is a quartic in time for the longitudinal coordinate (the end
//! position is free) and a quintic for the lateral coordinate. Candidates are
//! obtained by sweeping the terminal longitudinal speed and lateral position.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Kinematics, Scene};
use crate::sim::RoadModel;
use crate::{DT, HORIZON};

/// Polynomial `c[0] + c[1] t + ... + c[N-1] t^(N-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Polynomial<const N: usize>(#[serde(with = "coeffs")] pub [f64; N]);

impl<const N: usize> Polynomial<N> {
    pub fn coefficients(&self) -> &[f64; N] {
        &self.0
    }

    /// Value of the `order`-th time derivative at `t`.
    pub fn eval(&self, t: f64, order: usize) -> f64 {
        let mut acc = 0.0;
        for i in (order..N).rev() {
            let mut factor = 1.0;
            for k in 0..order {
                factor *= (i - k) as f64;
            }
            acc = acc * t + factor * self.0[i];
        }
        acc
    }
}

mod coeffs {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer, const N: usize>(c: &[f64; N], s: S) -> Result<S::Ok, S::Error> {
        c.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(d: D) -> Result<[f64; N], D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        let n = v.len();
        v.try_into()
            .map_err(|_| serde::de::Error::custom(format!("expected {N} coefficients, got {n}")))
    }
}

fn check_horizon(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("horizon must be positive, got {t}")));
    }
    Ok(())
}

/// Quartic `x(τ)` with `x(0)=x_s, ẋ(0)=v_xs, ẍ(0)=a_xs, ẋ(T)=v_xe, ẍ(T)=a_xe`.
pub fn solve_longitudinal(
    x_s: f64,
    v_xs: f64,
    a_xs: f64,
    v_xe: f64,
    a_xe: f64,
    t: f64,
) -> Result<Polynomial<5>> {
    check_horizon(t)?;
    let a2 = 0.5 * a_xs;
    let r1 = v_xe - v_xs - 2.0 * a2 * t;
    let r2 = a_xe - 2.0 * a2;
    let a3 = (3.0 * r1 - t * r2) / (3.0 * t * t);
    let a4 = (t * r2 - 2.0 * r1) / (4.0 * t * t * t);
    Ok(Polynomial([x_s, v_xs, a2, a3, a4]))
}

/// Quintic `y(τ)` pinned in position, velocity and acceleration at both ends.
pub fn solve_lateral(
    y_s: f64,
    v_ys: f64,
    a_ys: f64,
    y_e: f64,
    v_ye: f64,
    a_ye: f64,
    t: f64,
) -> Result<Polynomial<6>> {
    check_horizon(t)?;
    let b0 = y_s;
    let b1 = v_ys;
    let b2 = 0.5 * a_ys;
    let t2 = t * t;
    let t3 = t2 * t;
    // Residuals of the three terminal conditions after the initial terms.
    let p = y_e - b0 - b1 * t - b2 * t2;
    let v = v_ye - b1 - 2.0 * b2 * t;
    let a = a_ye - 2.0 * b2;
    let b3 = (20.0 * p - 8.0 * v * t + a * t2) / (2.0 * t3);
    let b4 = (-30.0 * p + 14.0 * v * t - 2.0 * a * t2) / (2.0 * t3 * t);
    let b5 = (12.0 * p - 6.0 * v * t + a * t2) / (2.0 * t3 * t2);
    Ok(Polynomial([b0, b1, b2, b3, b4, b5]))
}

/// Terminal state a candidate is steered to. The longitudinal end position is free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetState {
    pub vxe: f64,
    pub axe: f64,
    pub ye: f64,
    pub vye: f64,
    pub aye: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialPair {
    pub lon: Polynomial<5>,
    pub lat: Polynomial<6>,
    pub horizon: f64,
}

impl PolynomialPair {
    pub fn solve(init: &Kinematics, target: &TargetState, horizon: f64) -> Result<Self> {
        let lon = solve_longitudinal(init.x, init.vx, init.ax, target.vxe, target.axe, horizon)?;
        let lat = solve_lateral(
            init.y, init.vy, init.ay, target.ye, target.vye, target.aye, horizon,
        )?;
        Ok(Self { lon, lat, horizon })
    }

    pub fn point(&self, t: f64) -> TrajPoint {
        TrajPoint {
            t,
            x: self.lon.eval(t, 0),
            y: self.lat.eval(t, 0),
            vx: self.lon.eval(t, 1),
            vy: self.lat.eval(t, 1),
            ax: self.lon.eval(t, 2),
            ay: self.lat.eval(t, 2),
            jx: self.lon.eval(t, 3),
        }
    }

    /// Samples `steps + 1` evenly spaced points over `[0, horizon]`.
    pub fn sample(&self, steps: usize) -> Vec<TrajPoint> {
        (0..=steps)
            .map(|k| self.point(k as f64 * self.horizon / steps as f64))
            .collect()
    }
}

/// One sample of a planned trajectory with its analytic derivatives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub ax: f64,
    pub ay: f64,
    pub jx: f64,
}

impl TrajPoint {
    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectorySource {
    Generated,
    Demonstration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateTrajectory {
    pub source: TrajectorySource,
    pub target: Option<TargetState>,
    pub poly: PolynomialPair,
    pub points: Vec<TrajPoint>,
}

impl CandidateTrajectory {
    pub fn from_poly(poly: PolynomialPair, source: TrajectorySource, target: Option<TargetState>) -> Self {
        let steps = (poly.horizon / DT).round() as usize;
        Self {
            source,
            target,
            points: poly.sample(steps),
            poly,
        }
    }

    pub fn last(&self) -> &TrajPoint {
        self.points.last().expect("trajectory has samples")
    }
}

/// Discretization of the target space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpace {
    /// Terminal speeds span `[v - half_range, v + half_range]`.
    pub speed_half_range: f64,
    pub speed_step: f64,
    pub horizon: f64,
}

impl Default for SamplingSpace {
    fn default() -> Self {
        Self {
            speed_half_range: 5.0,
            speed_step: 1.0,
            horizon: HORIZON,
        }
    }
}

impl SamplingSpace {
    /// Terminal speeds around `v`, clamped at zero with duplicates removed.
    pub fn speed_grid(&self, v: f64) -> Vec<f64> {
        let n = (2.0 * self.speed_half_range / self.speed_step).round() as i64;
        let mut speeds: Vec<f64> = Vec::with_capacity(n as usize + 1);
        for k in 0..=n {
            let s = (v - self.speed_half_range + k as f64 * self.speed_step).max(0.0);
            if speeds.last().is_none_or(|&prev| prev != s) {
                speeds.push(s);
            }
        }
        speeds
    }
}

/// Cartesian product of terminal speeds and reachable lateral positions.
///
/// Lateral targets are the current `y` (lane keeping) plus the centers of
/// the left and right neighbor lanes when they exist.
pub fn sample_targets(
    init: &Kinematics,
    lane_id: u8,
    road: &RoadModel,
    space: &SamplingSpace,
) -> Vec<TargetState> {
    let mut lateral = vec![init.y];
    for lane in [road.left_of(lane_id), road.right_of(lane_id)]
        .into_iter()
        .flatten()
    {
        lateral.push(road.lane_center(lane));
    }
    let speeds = space.speed_grid(init.vx);
    let mut out = Vec::with_capacity(speeds.len() * lateral.len());
    for &ye in &lateral {
        for &vxe in &speeds {
            out.push(TargetState {
                vxe,
                axe: 0.0,
                ye,
                vye: 0.0,
                aye: 0.0,
            });
        }
    }
    out
}

pub fn generate_candidates(
    scene: &Scene,
    road: &RoadModel,
    space: &SamplingSpace,
) -> Result<Vec<CandidateTrajectory>> {
    sample_targets(&scene.ego_init, scene.ego_lane, road, space)
        .into_iter()
        .map(|target| {
            let poly = PolynomialPair::solve(&scene.ego_init, &target, space.horizon)?;
            Ok(CandidateTrajectory::from_poly(
                poly,
                TrajectorySource::Generated,
                Some(target),
            ))
        })
        .collect()
}

/// Writes one JSON record per candidate.
pub fn write_candidates_jsonl<W: Write>(mut w: W, candidates: &[CandidateTrajectory]) -> Result<()> {
    for c in candidates {
        serde_json::to_writer(&mut w, c)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
