//! Per-step reward features of a rolled-out trajectory, their sum over the
//! horizon and dataset-wide normalization.

use std::ops::{Index, IndexMut};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{RolloutResult, VehicleState};

pub const FEATURE_COUNT: usize = 8;

pub const SPEED: usize = 0;
pub const ACC_X: usize = 1;
pub const ACC_Y: usize = 2;
pub const JERK_X: usize = 3;
pub const RISK_FRONT: usize = 4;
pub const RISK_REAR: usize = 5;
pub const COLLISION: usize = 6;
pub const INTERACTION: usize = 7;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "speed",
    "acc_x",
    "acc_y",
    "jerk_x",
    "risk_front",
    "risk_rear",
    "collision",
    "interaction",
];

/// Speeds below this are clamped before dividing a gap by them.
pub const MIN_RISK_SPEED: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn dot(&self, theta: &[f64; FEATURE_COUNT]) -> f64 {
        self.0.iter().zip(theta).map(|(f, w)| f * w).sum()
    }

    pub fn add_assign(&mut self, other: &FeatureVector) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub fn scaled(&self, k: f64) -> FeatureVector {
        FeatureVector(self.0.map(|v| v * k))
    }

    pub fn sub(&self, other: &FeatureVector) -> FeatureVector {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(&other.0) {
            *a -= b;
        }
        out
    }
}

impl Index<usize> for FeatureVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for FeatureVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Nearest vehicles ahead and behind within half a lane width of `y`, as
/// `(center gap, state)`.
fn nearest_in_lane<'a>(
    ego: &VehicleState,
    others: impl Iterator<Item = &'a VehicleState>,
    half_band: f64,
) -> (Option<(f64, &'a VehicleState)>, Option<(f64, &'a VehicleState)>) {
    let mut front: Option<(f64, &VehicleState)> = None;
    let mut rear: Option<(f64, &VehicleState)> = None;
    for o in others {
        if (o.y - ego.y).abs() > half_band {
            continue;
        }
        let d = o.x - ego.x;
        if d > 0.0 && front.is_none_or(|(g, _)| d < g) {
            front = Some((d, o));
        } else if d < 0.0 && rear.is_none_or(|(g, _)| -d < g) {
            rear = Some((-d, o));
        }
    }
    (front, rear)
}

/// Raw features at step `k`, with `lane_width` setting the same-lane band.
pub fn step_features(r: &RolloutResult, k: usize, lane_width: f64) -> FeatureVector {
    let p = &r.ego_plan[k];
    let ego = &r.ego_states[k];
    let mut f = FeatureVector::zeros();
    f[SPEED] = p.speed();
    f[ACC_X] = p.ax.abs();
    f[ACC_Y] = p.ay.abs();
    f[JERK_X] = p.jx.abs();

    let others = r.neighbor_states.values().filter_map(|v| v[k].as_ref());
    let (front, rear) = nearest_in_lane(ego, others, 0.5 * lane_width);
    if let Some((gap, _)) = front {
        f[RISK_FRONT] = (-gap / ego.speed.max(MIN_RISK_SPEED)).exp();
    }
    if let Some((gap, follower)) = rear {
        f[RISK_REAR] = (-gap / follower.speed.max(MIN_RISK_SPEED)).exp();
    }
    if r.collision_step().is_some_and(|c| k >= c) {
        f[COLLISION] = 1.0;
    }
    f[INTERACTION] = r.influenced_decels[k].values().filter(|a| **a < 0.0).map(|a| -a).sum();
    f
}

/// Sum of [`step_features`] over every recorded step.
pub fn trajectory_features(r: &RolloutResult, lane_width: f64) -> FeatureVector {
    let mut acc = FeatureVector::zeros();
    for k in 0..r.ego_states.len() {
        acc.add_assign(&step_features(r, k, lane_width));
    }
    acc
}

/// Per-feature divisors taken from the training buffer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationConstants {
    pub divisors: [f64; FEATURE_COUNT],
}

impl Default for NormalizationConstants {
    fn default() -> Self {
        Self { divisors: [1.0; FEATURE_COUNT] }
    }
}

impl NormalizationConstants {
    /// Column maxima of `buffer`; all-zero columns get divisor 1.
    pub fn fit<'a>(buffer: impl IntoIterator<Item = &'a FeatureVector>) -> Result<Self> {
        let mut max = [0.0f64; FEATURE_COUNT];
        let mut seen = false;
        for f in buffer {
            seen = true;
            for (m, v) in max.iter_mut().zip(&f.0) {
                if !v.is_finite() || *v < 0.0 {
                    return Err(Error::Numeric(format!("feature value {v} is not a finite non-negative number")));
                }
                *m = m.max(*v);
            }
        }
        if !seen {
            return Err(Error::Config("cannot normalize an empty feature buffer".into()));
        }
        Ok(Self { divisors: max.map(|m| if m > 0.0 { m } else { 1.0 }) })
    }

    pub fn apply(&self, f: &FeatureVector) -> FeatureVector {
        let mut out = *f;
        for (v, d) in out.0.iter_mut().zip(&self.divisors) {
            *v /= d;
        }
        out
    }

    /// Stable 64-bit FNV-1a digest of the exact divisor bits, used to tie a
    /// model to the constants it was trained with.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for d in &self.divisors {
            for b in d.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        format!("{h:016x}")
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&NormalizationFile::from(*self))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NormalizationFile = serde_json::from_str(text)?;
        file.into_constants()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// JSON sidecar: divisors keyed by feature name plus the fingerprint.
#[derive(Debug, Serialize, Deserialize)]
struct NormalizationFile {
    features: Vec<String>,
    divisors: Vec<f64>,
    fingerprint: String,
}

impl From<NormalizationConstants> for NormalizationFile {
    fn from(c: NormalizationConstants) -> Self {
        Self {
            features: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            divisors: c.divisors.to_vec(),
            fingerprint: c.fingerprint(),
        }
    }
}

impl NormalizationFile {
    fn into_constants(self) -> Result<NormalizationConstants> {
        if self.features != FEATURE_NAMES {
            return Err(Error::Version(format!(
                "normalization file lists features {:?}, expected {:?}",
                self.features, FEATURE_NAMES
            )));
        }
        let divisors: [f64; FEATURE_COUNT] = self
            .divisors
            .try_into()
            .map_err(|_| Error::Schema("divisors".into()))?;
        if divisors.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(Error::Data("normalization divisors must be positive".into()));
        }
        let c = NormalizationConstants { divisors };
        if c.fingerprint() != self.fingerprint {
            return Err(Error::Version("normalization fingerprint does not match its divisors".into()));
        }
        Ok(c)
    }
}

/// Normalizes every vector by the buffer-wide column maxima.
pub fn normalize_buffer(buffer: &[FeatureVector]) -> Result<(Vec<FeatureVector>, NormalizationConstants)> {
    let c = NormalizationConstants::fit(buffer)?;
    Ok((buffer.iter().map(|f| c.apply(f)).collect(), c))
}
