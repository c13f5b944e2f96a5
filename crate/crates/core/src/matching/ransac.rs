//! RANSAC mismatch removal under a 2-D similarity model.
//!
//! Keypoints are treated as complex numbers, so a similarity transform is
//! `b = s * a + t` with `s` encoding rotation and uniform scale. Two
//! correspondences determine the model exactly.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::descriptors::DescriptorSet;
use super::matcher::MatchPair;
use crate::error::{Error, Result};

const DEGENERATE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacConfig {
    pub iters: usize,
    /// Inlier tolerance in pixels.
    pub tol: f64,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            iters: 1000,
            tol: 5.0,
            seed: 0,
        }
    }
}

/// `p -> scale_rot * p + shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub scale_rot: Complex64,
    pub shift: Complex64,
}

impl Similarity {
    pub fn from_params(scale: f64, angle: f64, tx: f64, ty: f64) -> Self {
        Self {
            scale_rot: Complex64::from_polar(scale, angle),
            shift: Complex64::new(tx, ty),
        }
    }

    #[inline]
    pub fn apply(&self, p: Complex64) -> Complex64 {
        self.scale_rot * p + self.shift
    }

    /// Exact model through two correspondences; `None` when either side's
    /// points coincide.
    pub fn from_two(a1: Complex64, a2: Complex64, b1: Complex64, b2: Complex64) -> Option<Self> {
        let da = a2 - a1;
        let db = b2 - b1;
        if da.norm_sqr() < DEGENERATE_EPS || db.norm_sqr() < DEGENERATE_EPS {
            return None;
        }
        let scale_rot = db / da;
        Some(Self {
            scale_rot,
            shift: b1 - scale_rot * a1,
        })
    }

    /// Least-squares fit over all correspondences.
    pub fn fit(a: &[Complex64], b: &[Complex64]) -> Option<Self> {
        if a.len() < 2 || a.len() != b.len() {
            return None;
        }
        let n = a.len() as f64;
        let ma = a.iter().sum::<Complex64>() / n;
        let mb = b.iter().sum::<Complex64>() / n;
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (&p, &q) in a.iter().zip(b) {
            let (pa, qb) = (p - ma, q - mb);
            num += qb * pa.conj();
            den += pa.norm_sqr();
        }
        if den < DEGENERATE_EPS {
            return None;
        }
        let scale_rot = num / den;
        Some(Self {
            scale_rot,
            shift: mb - scale_rot * ma,
        })
    }
}

#[inline]
fn point(set: &DescriptorSet, i: usize) -> Complex64 {
    let e = set.get(i);
    Complex64::new(e.x, e.y)
}

/// Removes mismatches from `pairs`. The returned pairs keep their input
/// order. Fewer than 3 pairs are returned unchanged.
pub fn ransac_filter(
    pairs: &[MatchPair],
    a: &DescriptorSet,
    b: &DescriptorSet,
    cfg: &RansacConfig,
) -> Result<Vec<MatchPair>> {
    if cfg.iters == 0 {
        return Err(Error::param("iters", "must be at least 1"));
    }
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::param("tol", format!("{} must be positive", cfg.tol)));
    }
    if let Some(m) = pairs.iter().find(|m| m.idx_a >= a.len() || m.idx_b >= b.len()) {
        return Err(Error::param(
            "pairs",
            format!("pair ({}, {}) references a missing keypoint", m.idx_a, m.idx_b),
        ));
    }
    if pairs.len() < 3 {
        return Ok(pairs.to_vec());
    }

    let pa: Vec<Complex64> = pairs.iter().map(|m| point(a, m.idx_a)).collect();
    let pb: Vec<Complex64> = pairs.iter().map(|m| point(b, m.idx_b)).collect();
    let tol_sq = cfg.tol * cfg.tol;
    let inliers = |model: &Similarity| -> Vec<bool> {
        pa.iter()
            .zip(&pb)
            .map(|(&p, &q)| (model.apply(p) - q).norm_sqr() <= tol_sq)
            .collect()
    };
    let count = |flags: &[bool]| flags.iter().filter(|&&f| f).count();

    let n = pairs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(usize, Vec<bool>)> = None;
    // degenerate samples are redrawn, but the total number of draws is capped
    let max_draws = cfg.iters.saturating_mul(10);
    let (mut models, mut draws) = (0, 0);
    while models < cfg.iters && draws < max_draws {
        draws += 1;
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let Some(model) = Similarity::from_two(pa[i], pa[j], pb[i], pb[j]) else {
            continue;
        };
        models += 1;
        let flags = inliers(&model);
        let c = count(&flags);
        if best.as_ref().is_none_or(|(bc, _)| c > *bc) {
            best = Some((c, flags));
            if c == n {
                break;
            }
        }
    }
    let Some((best_count, best_flags)) = best else {
        return Ok(pairs.to_vec());
    };

    let sel = |flags: &[bool], pts: &[Complex64]| -> Vec<Complex64> {
        pts.iter().zip(flags).filter(|(_, &f)| f).map(|(&p, _)| p).collect()
    };
    let flags = match Similarity::fit(&sel(&best_flags, &pa), &sel(&best_flags, &pb)) {
        Some(refit) => {
            let refit_flags = inliers(&refit);
            if count(&refit_flags) >= best_count {
                refit_flags
            } else {
                best_flags
            }
        }
        None => best_flags,
    };
    Ok(pairs
        .iter()
        .zip(&flags)
        .filter(|(_, &f)| f)
        .map(|(m, _)| *m)
        .collect())
}
