use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, NormalizationConstants, FEATURE_COUNT, FEATURE_NAMES};

/// Features of one scene's demonstration and generated candidates, with the
/// rolled-out endpoints needed to score human likeness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEntry {
    pub scene_id: String,
    pub demo: FeatureVector,
    pub candidates: Vec<FeatureVector>,
    pub candidate_endpoints: Vec<(f64, f64)>,
    /// Recorded ego position at the end of the horizon.
    pub gt_endpoint: (f64, f64),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SceneBuffer {
    pub entries: Vec<SceneEntry>,
}

impl SceneBuffer {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn vectors(&self) -> impl Iterator<Item = &FeatureVector> {
        self.entries.iter().flat_map(|e| std::iter::once(&e.demo).chain(&e.candidates))
    }

    pub fn normalized(&self, c: &NormalizationConstants) -> SceneBuffer {
        SceneBuffer {
            entries: self
                .entries
                .iter()
                .map(|e| SceneEntry {
                    demo: c.apply(&e.demo),
                    candidates: e.candidates.iter().map(|f| c.apply(f)).collect(),
                    ..e.clone()
                })
                .collect(),
        }
    }

    /// Normalizes by the column maxima of this buffer.
    pub fn normalize(&self) -> Result<(SceneBuffer, NormalizationConstants)> {
        let c = NormalizationConstants::fit(self.vectors())?;
        Ok((self.normalized(&c), c))
    }

    /// Checks that every scene has one demonstration, at least two candidates
    /// and one endpoint per candidate.
    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if e.candidates.len() < 2 {
                return Err(Error::Data(format!(
                    "scene {}: {} generated candidates, at least 2 needed",
                    e.scene_id,
                    e.candidates.len()
                )));
            }
            if e.candidate_endpoints.len() != e.candidates.len() {
                return Err(Error::Data(format!("scene {}: endpoint count mismatch", e.scene_id)));
            }
        }
        Ok(())
    }

    pub fn extend(&mut self, other: SceneBuffer) {
        self.entries.extend(other.entries);
    }
}

fn header() -> Vec<String> {
    let mut h = vec!["scene_id".to_string(), "candidate_id".into(), "is_demo".into()];
    h.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    h.extend(["end_x".to_string(), "end_y".into()]);
    h
}

/// Flat table, one row per trajectory. The demonstration row comes first
/// with `candidate_id` -1; its end columns hold the recorded endpoint.
pub fn write_buffer_csv<W: Write>(w: W, buffer: &SceneBuffer) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(header())?;
    let row = |id: &str, cid: i64, demo: bool, f: &FeatureVector, end: (f64, f64)| {
        let mut r = vec![id.to_string(), cid.to_string(), (demo as u8).to_string()];
        // Shortest round-trip representation keeps the table lossless.
        r.extend(f.0.iter().map(|v| format!("{v:?}")));
        r.push(format!("{:?}", end.0));
        r.push(format!("{:?}", end.1));
        r
    };
    for e in &buffer.entries {
        wtr.write_record(row(&e.scene_id, -1, true, &e.demo, e.gt_endpoint))?;
        for (i, (f, end)) in e.candidates.iter().zip(&e.candidate_endpoints).enumerate() {
            wtr.write_record(row(&e.scene_id, i as i64, false, f, *end))?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a table written by [`write_buffer_csv`]. Scenes keep their order of
/// first appearance; candidates are ordered by `candidate_id`.
pub fn read_buffer_csv<R: Read>(r: R) -> Result<SceneBuffer> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let expected = header();
    for (i, col) in expected.iter().enumerate() {
        if headers.get(i) != Some(col.as_str()) {
            return Err(Error::Schema(col.clone()));
        }
    }
    let mut order: Vec<String> = Vec::new();
    let mut demos: BTreeMap<String, (FeatureVector, (f64, f64))> = BTreeMap::new();
    let mut cands: BTreeMap<String, Vec<(i64, FeatureVector, (f64, f64))>> = BTreeMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = line + 2;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Data(format!("buffer line {line}: bad value in column {}", expected[i])))
        };
        let id = rec.get(0).unwrap_or_default().to_string();
        let cid = rec
            .get(1)
            .and_then(|s| s.parse::<i64>().ok())
            .ok_or_else(|| Error::Data(format!("buffer line {line}: bad candidate_id")))?;
        let is_demo = rec.get(2) == Some("1");
        let mut f = FeatureVector::zeros();
        for k in 0..FEATURE_COUNT {
            f[k] = num(3 + k)?;
        }
        let end = (num(3 + FEATURE_COUNT)?, num(4 + FEATURE_COUNT)?);
        if !demos.contains_key(&id) && !cands.contains_key(&id) {
            order.push(id.clone());
        }
        if is_demo {
            if demos.insert(id.clone(), (f, end)).is_some() {
                return Err(Error::Data(format!("buffer line {line}: second demonstration for scene {id}")));
            }
        } else {
            cands.entry(id).or_default().push((cid, f, end));
        }
    }
    let mut buffer = SceneBuffer::default();
    for id in order {
        let (demo, gt) = demos
            .remove(&id)
            .ok_or_else(|| Error::Data(format!("buffer: scene {id} has no demonstration row")))?;
        let mut cs = cands.remove(&id).unwrap_or_default();
        cs.sort_by_key(|c| c.0);
        buffer.entries.push(SceneEntry {
            scene_id: id,
            demo,
            candidate_endpoints: cs.iter().map(|c| c.2).collect(),
            candidates: cs.into_iter().map(|c| c.1).collect(),
            gt_endpoint: gt,
        });
    }
    Ok(buffer)
}
