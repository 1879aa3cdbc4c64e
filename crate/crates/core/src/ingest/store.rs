//! Canonical track store: one row per vehicle sample, meters and seconds,
//! six decimals.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, TrackState, VehicleTrack};
use crate::error::{Error, Result};
use crate::DT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StoreFormat {
    Csv,
    Jsonl,
}

impl StoreFormat {
    /// `.jsonl`/`.ndjson` select line-delimited JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => StoreFormat::Jsonl,
            _ => StoreFormat::Csv,
        }
    }
}

const HEADER: &str = "vehicle_id,t,x,y,vx,vy,ax,ay,lane_id,length,width";

#[derive(Debug, Serialize, Deserialize)]
struct StoreRow {
    vehicle_id: i64,
    t: f64,
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    ax: f64,
    ay: f64,
    lane_id: u8,
    length: f64,
    width: f64,
}

pub fn write_store(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_store_writer(file, dataset, StoreFormat::from_path(path))
}

pub fn write_store_writer<W: Write>(mut w: W, dataset: &Dataset, format: StoreFormat) -> Result<()> {
    if format == StoreFormat::Csv {
        writeln!(w, "{HEADER}")?;
    }
    for track in dataset.tracks.values() {
        for (i, s) in track.states.iter().enumerate() {
            let t = (track.first_frame + i as i64) as f64 * track.dt;
            let nums = [t, s.x, s.y, s.vx, s.vy, s.ax, s.ay];
            match format {
                StoreFormat::Csv => {
                    write!(w, "{}", track.vehicle_id)?;
                    for v in nums {
                        write!(w, ",{}", fixed6(v))?;
                    }
                    writeln!(w, ",{},{},{}", s.lane_id, fixed6(track.length), fixed6(track.width))?;
                }
                StoreFormat::Jsonl => {
                    // Numbers are written verbatim so the six-decimal form survives.
                    writeln!(
                        w,
                        "{{\"vehicle_id\":{},\"t\":{},\"x\":{},\"y\":{},\"vx\":{},\"vy\":{},\"ax\":{},\"ay\":{},\"lane_id\":{},\"length\":{},\"width\":{}}}",
                        track.vehicle_id,
                        fixed6(nums[0]),
                        fixed6(nums[1]),
                        fixed6(nums[2]),
                        fixed6(nums[3]),
                        fixed6(nums[4]),
                        fixed6(nums[5]),
                        fixed6(nums[6]),
                        s.lane_id,
                        fixed6(track.length),
                        fixed6(track.width)
                    )?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn fixed6(v: f64) -> String {
    let s = format!("{v:.6}");
    // Avoid "-0.000000".
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn read_store(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_store_reader(file, StoreFormat::from_path(path))
}

pub fn read_store_reader<R: Read>(r: R, format: StoreFormat) -> Result<Dataset> {
    let rows: Vec<StoreRow> = match format {
        StoreFormat::Csv => {
            let mut rdr = csv::Reader::from_reader(r);
            let headers = rdr.headers()?.clone();
            for col in HEADER.split(',') {
                if !headers.iter().any(|h| h == col) {
                    return Err(Error::Schema(col.to_string()));
                }
            }
            rdr.deserialize().collect::<std::result::Result<_, _>>()?
        }
        StoreFormat::Jsonl => {
            let mut rows = Vec::new();
            for line in BufReader::new(r).lines() {
                let line = line?;
                if !line.trim().is_empty() {
                    rows.push(serde_json::from_str(&line)?);
                }
            }
            rows
        }
    };

    let mut grouped: BTreeMap<i64, Vec<(i64, StoreRow)>> = BTreeMap::new();
    for row in rows {
        let frame = (row.t / DT).round() as i64;
        grouped.entry(row.vehicle_id).or_default().push((frame, row));
    }
    let mut dataset = Dataset::default();
    for (vehicle_id, mut rows) in grouped {
        rows.sort_by_key(|(f, _)| *f);
        for w in rows.windows(2) {
            if w[1].0 != w[0].0 + 1 {
                return Err(Error::Data(format!(
                    "store: vehicle {vehicle_id} is not gap-free at frame {}",
                    w[0].0
                )));
            }
        }
        let first = &rows[0];
        let track = VehicleTrack {
            vehicle_id,
            first_frame: first.0,
            dt: DT,
            length: first.1.length,
            width: first.1.width,
            states: rows
                .iter()
                .map(|(_, r)| TrackState {
                    x: r.x,
                    y: r.y,
                    vx: r.vx,
                    vy: r.vy,
                    ax: r.ax,
                    ay: r.ay,
                    lane_id: r.lane_id,
                })
                .collect(),
        };
        dataset.tracks.insert(vehicle_id, track);
    }
    Ok(dataset)
}
