//! Nearest-neighbour descriptor matching.

use std::collections::HashSet;

use super::descriptors::DescriptorSet;
use crate::error::{Error, Result};

/// A correspondence from entry `idx_a` of the query set to `idx_b` of the
/// reference set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub idx_a: usize,
    pub idx_b: usize,
    /// Euclidean distance between the two descriptors.
    pub dist: f64,
    /// `d1 / d2`, present only for ratio-test matches.
    pub ratio: Option<f64>,
}

fn check_dims(a: &DescriptorSet, b: &DescriptorSet) -> Result<()> {
    if !a.is_empty() && !b.is_empty() && a.dim() != b.dim() {
        return Err(Error::InvalidDescriptor(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

#[inline]
fn sq_dist(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Nearest neighbour in `b` for each entry of `a`, ties to the lowest index.
/// With `max_dist`, pairs farther than the threshold are dropped.
pub fn match_ed(a: &DescriptorSet, b: &DescriptorSet, max_dist: Option<f64>) -> Result<Vec<MatchPair>> {
    check_dims(a, b)?;
    if b.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(a.len());
    for (i, ea) in a.entries().iter().enumerate() {
        let mut best = (usize::MAX, f64::INFINITY);
        for (j, eb) in b.entries().iter().enumerate() {
            let d = sq_dist(&ea.v, &eb.v);
            if d < best.1 {
                best = (j, d);
            }
        }
        let dist = best.1.sqrt();
        if max_dist.is_none_or(|t| dist <= t) {
            out.push(MatchPair {
                idx_a: i,
                idx_b: best.0,
                dist,
                ratio: None,
            });
        }
    }
    Ok(out)
}

/// Two-nearest-neighbour matching with the distance ratio test.
///
/// A match is accepted when `d1 / d2 < ratio_threshold`. Queries whose two
/// nearest neighbours are both at distance 0 are ambiguous and rejected.
pub fn match_knn_rt(a: &DescriptorSet, b: &DescriptorSet, ratio_threshold: f64) -> Result<Vec<MatchPair>> {
    if !(ratio_threshold > 0.0 && ratio_threshold < 1.0) {
        return Err(Error::param(
            "ratio_threshold",
            format!("{ratio_threshold} is outside (0, 1)"),
        ));
    }
    check_dims(a, b)?;
    if b.len() < 2 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (i, ea) in a.entries().iter().enumerate() {
        let mut first = (usize::MAX, f64::INFINITY);
        let mut second = f64::INFINITY;
        for (j, eb) in b.entries().iter().enumerate() {
            let d = sq_dist(&ea.v, &eb.v);
            if d < first.1 {
                second = first.1;
                first = (j, d);
            } else if d < second {
                second = d;
            }
        }
        let (d1, d2) = (first.1.sqrt(), second.sqrt());
        if d2 > 0.0 {
            let ratio = d1 / d2;
            if ratio < ratio_threshold {
                out.push(MatchPair {
                    idx_a: i,
                    idx_b: first.0,
                    dist: d1,
                    ratio: Some(ratio),
                });
            }
        }
    }
    Ok(out)
}

/// Keeps `(i, j)` from the forward list only when the backward list maps
/// `j` back to `i`. Output is ordered by `idx_a`.
pub fn bidirectional(ab: &[MatchPair], ba: &[MatchPair]) -> Vec<MatchPair> {
    let back: HashSet<(usize, usize)> = ba.iter().map(|m| (m.idx_b, m.idx_a)).collect();
    let mut out: Vec<MatchPair> = ab
        .iter()
        .filter(|m| back.contains(&(m.idx_a, m.idx_b)))
        .copied()
        .collect();
    out.sort_by_key(|m| (m.idx_a, m.idx_b));
    out
}
