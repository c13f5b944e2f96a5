use super::matcher::MatchPair;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreMode {
    /// Number of surviving matches.
    #[default]
    Raw,
    /// Matches divided by the smaller keypoint count, capped at 1.
    Normalized,
}

pub fn similarity_score(pairs: &[MatchPair], a_count: usize, b_count: usize, mode: ScoreMode) -> f64 {
    let n = pairs.len() as f64;
    match mode {
        ScoreMode::Raw => n,
        // many-to-one ED matches can outnumber the smaller set
        ScoreMode::Normalized => (n / a_count.min(b_count).max(1) as f64).min(1.0),
    }
}

/// Fuses per-template scores of one probe by taking the maximum.
pub fn template_score(probe_scores: &[f64]) -> Result<f64> {
    if probe_scores.is_empty() {
        return Err(Error::Empty("template score list"));
    }
    Ok(probe_scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}
