use crate::error::{Error, Result};

/// Minimum endpoint distance to `gt` among the three most probable
/// candidates (all of them when fewer than three). Equal probabilities are
/// ranked by candidate index.
pub fn human_likeness(probs: &[f64], endpoints: &[(f64, f64)], gt: (f64, f64)) -> Result<f64> {
    if probs.is_empty() || probs.len() != endpoints.len() {
        return Err(Error::Eval(format!(
            "human likeness needs one endpoint per candidate, got {} probabilities and {} endpoints",
            probs.len(),
            endpoints.len()
        )));
    }
    let mut order: Vec<usize> = (0..probs.len()).collect();
    // Stable sort keeps index order among ties.
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));
    Ok(order
        .iter()
        .take(3)
        .map(|&i| (endpoints[i].0 - gt.0).hypot(endpoints[i].1 - gt.1))
        .fold(f64::INFINITY, f64::min))
}

/// Final displacement error of a single predicted endpoint.
pub fn displacement(end: (f64, f64), gt: (f64, f64)) -> f64 {
    (end.0 - gt.0).hypot(end.1 - gt.1)
}

/// Ranks starting at 1, ties receiving their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation; `None` when either side is constant or the
/// lengths differ.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}
