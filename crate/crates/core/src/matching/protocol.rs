//! Verification protocol over a pairs file.
//!
//! Each non-blank line of the pairs file describes one comparison:
//!
//! ```text
//! genuine|impostor,<probe descriptors>,<template 1>;<template 2>;...
//! ```
//!
//! Relative paths are resolved against the pairs file's directory. Lines
//! starting with `#` are ignored.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use super::descriptors::{load_descriptors, root_sift, DescriptorSet};
use super::eer::{compute_eer, EerResult, ScoreSet};
use super::matcher::{bidirectional, match_ed, match_knn_rt, MatchPair};
use super::ransac::{ransac_filter, RansacConfig};
use super::score::{similarity_score, template_score, ScoreMode};
use crate::error::{Error, Result};

/// Ratio threshold for forward matching.
pub const DEFAULT_RATIO: f64 = 0.7;
/// Ratio threshold when bidirectional filtering is on.
pub const DEFAULT_BIDIRECTIONAL_RATIO: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatcherKind {
    Ed,
    #[default]
    KnnRt,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChainConfig {
    pub matcher: MatcherKind,
    /// Ratio threshold; `None` picks 0.7, or 0.8 with bidirectional filtering.
    pub ratio: Option<f64>,
    /// Distance cut-off for ED matching.
    pub max_dist: Option<f64>,
    pub bidirectional: bool,
    pub ransac: Option<RansacConfig>,
    pub root_sift: bool,
    pub score: ScoreMode,
}

impl ChainConfig {
    pub fn effective_ratio(&self) -> f64 {
        self.ratio.unwrap_or(if self.bidirectional {
            DEFAULT_BIDIRECTIONAL_RATIO
        } else {
            DEFAULT_RATIO
        })
    }

    fn one_way(&self, a: &DescriptorSet, b: &DescriptorSet) -> Result<Vec<MatchPair>> {
        match self.matcher {
            MatcherKind::Ed => match_ed(a, b, self.max_dist),
            MatcherKind::KnnRt => match_knn_rt(a, b, self.effective_ratio()),
        }
    }

    /// Matches, filters and scores a probe against one template. Both sets
    /// are expected to be already transformed (see [`ChainConfig::prepare`]).
    pub fn score_pair(&self, probe: &DescriptorSet, template: &DescriptorSet) -> Result<f64> {
        let forward = self.one_way(probe, template)?;
        let mut pairs = if self.bidirectional {
            bidirectional(&forward, &self.one_way(template, probe)?)
        } else {
            forward
        };
        if let Some(cfg) = &self.ransac {
            pairs = ransac_filter(&pairs, probe, template, cfg)?;
        }
        Ok(similarity_score(&pairs, probe.len(), template.len(), self.score))
    }

    /// Applies the descriptor transform selected by the chain.
    pub fn prepare(&self, set: DescriptorSet) -> Result<DescriptorSet> {
        if self.root_sift {
            root_sift(&set)
        } else {
            Ok(set)
        }
    }

    /// Best score of a probe over its templates.
    pub fn score_probe(&self, probe: &DescriptorSet, templates: &[&DescriptorSet]) -> Result<f64> {
        let scores = templates
            .iter()
            .map(|t| self.score_pair(probe, t))
            .collect::<Result<Vec<_>>>()?;
        template_score(&scores)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Genuine,
    Impostor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub label: Label,
    pub probe: PathBuf,
    pub templates: Vec<PathBuf>,
}

/// Parses pairs-file text, resolving relative paths against `base`.
pub fn parse_pairs(text: &str, base: &Path) -> Result<Vec<Comparison>> {
    let resolve = |p: &str| {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| Error::ProtocolFormat {
            line: line_no,
            reason,
        };
        let mut fields = line.splitn(3, ',');
        let (Some(label), Some(probe), Some(templates)) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err("expected `label,probe,templates`".into()));
        };
        let label = match label.trim() {
            "genuine" => Label::Genuine,
            "impostor" => Label::Impostor,
            other => return Err(err(format!("unknown label {other:?}"))),
        };
        let probe = probe.trim();
        if probe.is_empty() {
            return Err(err("empty probe path".into()));
        }
        let templates: Vec<PathBuf> = templates
            .split(';')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(resolve)
            .collect();
        if templates.is_empty() {
            return Err(err("no template paths".into()));
        }
        out.push(Comparison {
            label,
            probe: resolve(probe),
            templates,
        });
    }
    Ok(out)
}

pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<Comparison>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pairs(&text, path.parent().unwrap_or(Path::new("")))
}

#[derive(Debug, Clone)]
pub struct ProtocolOutcome {
    pub scores: ScoreSet,
    pub result: EerResult,
}

/// Scores every comparison and computes the EER. Descriptor files are loaded
/// once each; comparisons run in parallel but scores keep file order.
pub fn run_comparisons(comparisons: &[Comparison], cfg: &ChainConfig) -> Result<ProtocolOutcome> {
    let mut paths: Vec<&PathBuf> = comparisons
        .iter()
        .flat_map(|c| std::iter::once(&c.probe).chain(&c.templates))
        .collect();
    paths.sort();
    paths.dedup();
    let loaded: HashMap<&PathBuf, Arc<DescriptorSet>> = paths
        .par_iter()
        .map(|&p| Ok((p, Arc::new(cfg.prepare(load_descriptors(p)?)?))))
        .collect::<Result<_>>()?;

    let scored: Vec<(Label, f64)> = comparisons
        .par_iter()
        .map(|c| {
            let templates: Vec<&DescriptorSet> = c.templates.iter().map(|t| loaded[t].as_ref()).collect();
            Ok((c.label, cfg.score_probe(&loaded[&c.probe], &templates)?))
        })
        .collect::<Result<_>>()?;

    let mut scores = ScoreSet::default();
    for (label, s) in scored {
        match label {
            Label::Genuine => scores.genuine.push(s),
            Label::Impostor => scores.impostor.push(s),
        }
    }
    let result = compute_eer(&scores)?;
    Ok(ProtocolOutcome { scores, result })
}

pub fn eval_protocol(pairs_file: impl AsRef<Path>, cfg: &ChainConfig) -> Result<ProtocolOutcome> {
    run_comparisons(&load_pairs(pairs_file)?, cfg)
}
