use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, TrackState, VehicleTrack};
use crate::error::{Error, Result};
use crate::DT;

pub const FEET_TO_METERS: f64 = 0.3048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthUnit {
    Feet,
    Meters,
}

impl LengthUnit {
    pub fn factor(self) -> f64 {
        match self {
            LengthUnit::Feet => FEET_TO_METERS,
            LengthUnit::Meters => 1.0,
        }
    }
}

impl std::str::FromStr for LengthUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "feet" | "ft" => Ok(LengthUnit::Feet),
            "meters" | "m" => Ok(LengthUnit::Meters),
            other => Err(Error::Config(format!("unknown length unit `{other}`"))),
        }
    }
}

/// One row of an NGSIM file, in source axes and units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawSample {
    pub vehicle_id: i64,
    pub frame_id: i64,
    pub local_x: f64,
    pub local_y: f64,
    pub length: f64,
    pub width: f64,
    pub lane_id: u8,
    /// 0 when there is none.
    pub preceding_id: i64,
    pub following_id: i64,
}

const REQUIRED: [&str; 7] = [
    "Vehicle_ID",
    "Frame_ID",
    "Local_X",
    "Local_Y",
    "v_Length",
    "v_Width",
    "Lane_ID",
];

pub fn parse_ngsim_csv(path: impl AsRef<Path>, unit: LengthUnit) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())?;
    parse_ngsim_reader(file, unit)
}

/// Parses NGSIM rows into unsmoothed tracks (velocities and accelerations zero).
pub fn parse_ngsim_reader<R: Read>(reader: R, unit: LengthUnit) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = [0usize; 7];
    for (slot, name) in idx.iter_mut().zip(REQUIRED) {
        *slot = column(name).ok_or_else(|| Error::Schema(name.to_string()))?;
    }
    // The preceding column is spelled both ways across NGSIM releases.
    let preceding = column("Preceding").or_else(|| column("Preceeding"));
    let following = column("Following");

    let mut rows: BTreeMap<i64, Vec<(RawSample, u64)>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<&str> {
            record
                .get(i)
                .ok_or_else(|| Error::Data(format!("line {line}: missing value for {name}")))
        };
        let num = |i: usize, name: &str| -> Result<f64> {
            let s = field(i, name)?;
            s.parse::<f64>()
                .map_err(|_| Error::Data(format!("line {line}: {name} `{s}` is not a number")))
        };
        let int = |i: usize, name: &str| -> Result<i64> {
            let v = num(i, name)?;
            if v.fract() != 0.0 {
                return Err(Error::Data(format!("line {line}: {name} `{v}` is not an integer")));
            }
            Ok(v as i64)
        };
        let lane = int(idx[6], "Lane_ID")?;
        if !(1..=8).contains(&lane) {
            return Err(Error::Data(format!("line {line}: Lane_ID {lane} outside 1..8")));
        }
        let sample = RawSample {
            vehicle_id: int(idx[0], "Vehicle_ID")?,
            frame_id: int(idx[1], "Frame_ID")?,
            local_x: num(idx[2], "Local_X")?,
            local_y: num(idx[3], "Local_Y")?,
            length: num(idx[4], "v_Length")?,
            width: num(idx[5], "v_Width")?,
            lane_id: lane as u8,
            preceding_id: preceding.map(|i| int(i, "Preceding")).transpose()?.unwrap_or(0),
            following_id: following.map(|i| int(i, "Following")).transpose()?.unwrap_or(0),
        };
        rows.entry(sample.vehicle_id).or_default().push((sample, line));
    }

    let k = unit.factor();
    let mut dataset = Dataset::default();
    for (vehicle_id, mut samples) in rows {
        samples.sort_by_key(|(s, _)| s.frame_id);
        for pair in samples.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.0.frame_id == b.0.frame_id {
                return Err(Error::Data(format!(
                    "line {}: duplicate row for vehicle {vehicle_id} frame {}",
                    b.1, b.0.frame_id
                )));
            }
            if b.0.frame_id != a.0.frame_id + 1 {
                return Err(Error::Data(format!(
                    "vehicle {vehicle_id}: frames jump from {} to {}",
                    a.0.frame_id, b.0.frame_id
                )));
            }
        }
        let first = samples[0].0;
        let states = samples
            .iter()
            .map(|(s, _)| TrackState {
                x: s.local_y * k,
                y: s.local_x * k,
                vx: 0.0,
                vy: 0.0,
                ax: 0.0,
                ay: 0.0,
                lane_id: s.lane_id,
            })
            .collect();
        dataset.tracks.insert(
            vehicle_id,
            VehicleTrack {
                vehicle_id,
                first_frame: first.frame_id,
                dt: DT,
                states,
                length: first.length * k,
                width: first.width * k,
            },
        );
    }
    Ok(dataset)
}
