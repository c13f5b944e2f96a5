//! Equal error rate from genuine and impostor similarity scores.
//!
//! Higher scores mean more similar. At threshold `t`, impostors scoring at
//! least `t` are false accepts and genuine comparisons scoring below `t` are
//! false rejects. Candidate thresholds are `-inf`, the midpoints between
//! consecutive distinct scores, and `+inf`; between two candidates the
//! curves are interpolated linearly and the EER is read off where
//! `FAR - FRR` changes sign.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreSet {
    pub genuine: Vec<f64>,
    pub impostor: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EerResult {
    pub eer: f64,
    /// Threshold at the crossing; the finite bracket when the other is infinite.
    pub threshold: f64,
    /// Ordered by increasing threshold.
    pub curve: Vec<CurvePoint>,
}

impl EerResult {
    /// `threshold,far,frr` header and rows, then `eer,<value>`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("threshold,far,frr\n");
        for p in &self.curve {
            let _ = writeln!(s, "{},{},{}", p.threshold, p.far, p.frr);
        }
        let _ = writeln!(s, "eer,{}", self.eer);
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

pub fn compute_eer(scores: &ScoreSet) -> Result<EerResult> {
    if scores.genuine.is_empty() {
        return Err(Error::Empty("genuine scores"));
    }
    if scores.impostor.is_empty() {
        return Err(Error::Empty("impostor scores"));
    }
    if let Some(s) = scores.genuine.iter().chain(&scores.impostor).find(|s| s.is_nan()) {
        return Err(Error::param("scores", format!("{s} is not a number")));
    }
    let genuine = sorted(&scores.genuine);
    let impostor = sorted(&scores.impostor);
    let mut pooled: Vec<f64> = genuine.iter().chain(&impostor).copied().collect();
    pooled.sort_by(f64::total_cmp);
    pooled.dedup();

    let mut thresholds = Vec::with_capacity(pooled.len() + 1);
    thresholds.push(f64::NEG_INFINITY);
    thresholds.extend(pooled.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    thresholds.push(f64::INFINITY);

    let ng = genuine.len() as f64;
    let ni = impostor.len() as f64;
    let curve: Vec<CurvePoint> = thresholds
        .iter()
        .map(|&t| {
            let accepted_impostors = impostor.len() - impostor.partition_point(|&s| s < t);
            let rejected_genuine = genuine.partition_point(|&s| s < t);
            CurvePoint {
                threshold: t,
                far: accepted_impostors as f64 / ni,
                frr: rejected_genuine as f64 / ng,
            }
        })
        .collect();

    // FAR - FRR starts at 1 and ends at -1 and never increases
    let k = curve
        .windows(2)
        .position(|w| w[0].far - w[0].frr >= 0.0 && w[1].far - w[1].frr <= 0.0)
        .expect("difference changes sign between the sentinels");
    let (p, q) = (curve[k], curve[k + 1]);
    let (dp, dq) = (p.far - p.frr, q.far - q.frr);
    let (eer, threshold) = if dp == 0.0 {
        (p.far, p.threshold)
    } else if dq == 0.0 {
        (q.far, q.threshold)
    } else {
        let lambda = dp / (dp - dq);
        let eer = p.far + lambda * (q.far - p.far);
        let threshold = match (p.threshold.is_finite(), q.threshold.is_finite()) {
            (true, true) => p.threshold + lambda * (q.threshold - p.threshold),
            (true, false) => p.threshold,
            (false, true) => q.threshold,
            (false, false) => 0.0,
        };
        (eer, threshold)
    };
    Ok(EerResult {
        eer: eer.clamp(0.0, 1.0),
        threshold,
        curve,
    })
}
