//! Acceptance suite. Run with `cargo test --test acceptance -- --nocapture`
//! to see one PASS/FAIL line per criterion.

mod common;

use std::time::{Duration, Instant};

use ilacs::matching::{
    compute_eer, eval_protocol, ransac_filter, ChainConfig, Descriptor, DescriptorSet, MatchPair, MatcherKind,
    RansacConfig, ScoreSet, Similarity,
};
use ilacs::{
    composite, effective_weight_sum, enhance, enhance_acs_tiles, enhance_ilacs_tiles, ilacs_tile, layered_tiles,
    load_image, save_image, tile_stats, weight_field, BinaryMask, BlendConfig, GrayImage, TileRect,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1 ───────────────────────────────────────────────────────────────────────────

fn ac1_forty_nine_tiles() -> Outcome {
    for n in (2..=32).step_by(2) {
        let counts: Vec<usize> = layered_tiles(4 * n, 4 * n, n)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|(_, t)| t.len())
            .collect();
        ensure(counts == [16, 12, 12, 9], || format!("n={n}: counts {counts:?}"))?;
    }
    let start = Instant::now();
    let layers = layered_tiles(64, 64, 16).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let total: usize = layers.iter().map(|(_, t)| t.len()).sum();
    ensure(total == 49, || format!("total {total}"))?;
    ensure(elapsed < Duration::from_millis(1), || format!("took {elapsed:?}"))?;
    Ok(format!("16+12+12+9 = 49 for every even n in 2..=32; {elapsed:?}"))
}

// 2 ───────────────────────────────────────────────────────────────────────────

fn whole(img: &GrayImage) -> TileRect {
    TileRect {
        x0: 0,
        y0: 0,
        w: img.width(),
        h: img.height(),
        nominal_cx: img.width() as f64 / 2.0,
        nominal_cy: img.height() as f64 / 2.0,
    }
}

fn ac2_ilacs_fixtures() -> Outcome {
    let img = GrayImage::from_fn(51, 1, |x, _| 50 + x as u8);
    let t = whole(&img);
    let st = tile_stats(&img, &t, None);
    ensure(st.multiplier == 5, || format!("multiplier {}", st.multiplier))?;
    let out = ilacs_tile(&img, &t, &st, None);
    ensure(out[10] == 50 && out[50] == 250, || format!("values {} {}", out[10], out[50]))?;

    let full = GrayImage::from_fn(16, 16, |x, y| (y * 16 + x) as u8);
    let t = whole(&full);
    let out = ilacs_tile(&full, &t, &tile_stats(&full, &t, None), None);
    ensure(out == full.pixels(), || "full-range tile not identity".into())?;

    let flat = GrayImage::filled(8, 8, 77);
    let t = whole(&flat);
    let st = tile_stats(&flat, &t, None);
    let out = ilacs_tile(&flat, &t, &st, None);
    ensure(st.multiplier == 0 && out.iter().all(|&v| v == 0), || "uniform tile not zero".into())?;
    Ok("gain 5 for [50,100], identity on full range, zeros on uniform".into())
}

// 3 ───────────────────────────────────────────────────────────────────────────

fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayImage {
    match rng.random_range(0..4) {
        0 => GrayImage::from_fn(w, h, |_, _| rng.random()),
        1 => {
            let base: u8 = rng.random_range(0..200);
            let spread: u8 = rng.random_range(1..56);
            GrayImage::from_fn(w, h, |_, _| base + rng.random_range(0..spread))
        }
        2 => {
            let (gx, gy) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            GrayImage::from_fn(w, h, |x, y| {
                let v = 128.0 + gx * (x as f64 - w as f64 / 2.0) + gy * (y as f64 - h as f64 / 2.0);
                (v + rng.random_range(-4.0..4.0)).round().clamp(0.0, 255.0) as u8
            })
        }
        _ => {
            let v: u8 = rng.random();
            GrayImage::from_fn(w, h, |x, y| if (x / 9 + y / 7) % 3 == 0 { v } else { v / 2 })
        }
    }
}

fn random_mask(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Option<BinaryMask> {
    if rng.random_bool(0.5) {
        return None;
    }
    let (cx, cy) = (rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64));
    let r = rng.random_range(5.0..80.0);
    Some(BinaryMask::from_fn(w, h, |x, y| {
        (x as f64 - cx).hypot(y as f64 - cy) < r
    }))
}

const TILE_SIZES: [usize; 5] = [8, 16, 20, 28, 32];

fn ac3_range_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let start = Instant::now();
    let mut pixels = 0usize;
    for i in 0..10_000 {
        let (w, h) = (rng.random_range(17..=129), rng.random_range(17..=129));
        let n = TILE_SIZES[rng.random_range(0..TILE_SIZES.len())];
        let img = random_image(&mut rng, w, h);
        let mask = random_mask(&mut rng, w, h);
        let cfg = BlendConfig { n, sigma_divisor: 4.4 };
        let acc = composite(&img, mask.as_ref(), &cfg).map_err(|e| e.to_string())?;
        // real-valued convex combinations, up to summation rounding
        for v in acc.normalized().into_iter().flatten() {
            ensure((-1e-9..=255.0 + 1e-9).contains(&v), || format!("image {i}: value {v}"))?;
        }
        let res = acc.resolve(mask.as_ref());
        ensure(res.clamped == 0, || format!("image {i}: {} clamps", res.clamped))?;
        pixels += w * h;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("10000 images, {pixels} pixels, 0 clamps, {elapsed:.2?}"))
}

// 4 ───────────────────────────────────────────────────────────────────────────

fn ac4_sum_to_one() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let (w, h) = (rng.random_range(1..=160), rng.random_range(1..=160));
        let n = 2 * rng.random_range(1..=16);
        let cfg = BlendConfig {
            n,
            sigma_divisor: rng.random_range(0.5..=20.0),
        };
        let mask = random_mask(&mut rng, w, h);
        let eff = effective_weight_sum(w, h, mask.as_ref(), &cfg).map_err(|e| e.to_string())?;
        for (p, &v) in eff.values.iter().enumerate() {
            if mask.as_ref().is_none_or(|m| m.bits()[p]) {
                let dev = (v - 1.0).abs();
                worst = worst.max(dev);
                ensure(dev <= 1e-9, || format!("config {i} ({w}x{h}, {cfg:?}) pixel {p}: {v}"))?;
            }
        }
    }
    Ok(format!("100 configs, max |sum - 1| = {worst:.2e}"))
}

// 5 ───────────────────────────────────────────────────────────────────────────

fn ac5_identity_checkerboard() -> Outcome {
    let mut checked = 0;
    for (w, h) in [(64, 64), (96, 80), (128, 32)] {
        let img = GrayImage::from_fn(w, h, |x, y| if (x / 2 + y / 2) % 2 == 0 { 0 } else { 255 });
        for n in [4, 8, 16, 32] {
            if w % n != 0 || h % n != 0 {
                continue;
            }
            let out = enhance(&img, None, &BlendConfig::new(n, 4.4).unwrap()).map_err(|e| e.to_string())?;
            ensure(out == img, || format!("{w}x{h} n={n} changed"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} checkerboard configurations bit-exact"))
}

// 6 ───────────────────────────────────────────────────────────────────────────

fn noisy_ramp(seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(256, 256, |x, _| (x as i32 + rng.random_range(-2..=2)).clamp(0, 255) as u8)
}

fn mean_edge_jump(img: &GrayImage, n: usize) -> f64 {
    let (w, h) = img.dimensions();
    let mut total = 0.0;
    let mut count = 0.0;
    for edge in (n..w).step_by(n) {
        for y in 0..h {
            total += (f64::from(img.get(edge, y)) - f64::from(img.get(edge - 1, y))).abs();
            count += 1.0;
        }
    }
    for edge in (n..h).step_by(n) {
        for x in 0..w {
            total += (f64::from(img.get(x, edge)) - f64::from(img.get(x, edge - 1))).abs();
            count += 1.0;
        }
    }
    total / count
}

fn ac6_blocky_reduction() -> Outcome {
    let n = 16;
    let cfg = BlendConfig::new(n, 4.4).unwrap();
    let (mut worst_acs, mut worst_ilacs): (f64, f64) = (0.0, 0.0);
    for seed in 0..20 {
        let img = noisy_ramp(seed);
        let blended = mean_edge_jump(&enhance(&img, None, &cfg).unwrap(), n);
        let acs = mean_edge_jump(&enhance_acs_tiles(&img, None, n).unwrap(), n);
        let ilacs = mean_edge_jump(&enhance_ilacs_tiles(&img, None, n).unwrap(), n);
        let (ra, ri) = (blended / acs, blended / ilacs);
        ensure(ra < 0.5, || format!("seed {seed}: {blended:.2} vs acs-tiles {acs:.2}"))?;
        ensure(ri < 0.5, || format!("seed {seed}: {blended:.2} vs ilacs-tiles {ilacs:.2}"))?;
        worst_acs = worst_acs.max(ra);
        worst_ilacs = worst_ilacs.max(ri);
    }
    Ok(format!(
        "20 seeds, worst ratio {worst_acs:.3} vs acs-tiles, {worst_ilacs:.3} vs ilacs-tiles"
    ))
}

// 7 ───────────────────────────────────────────────────────────────────────────

fn interior_range(n: usize, divisor: f64) -> Result<(f64, f64), String> {
    let size = 8 * n;
    let field = weight_field(size, size, &BlendConfig { n, sigma_divisor: divisor }).map_err(|e| e.to_string())?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for y in n..size - n {
        for x in n..size - n {
            lo = lo.min(field.get(x, y));
            hi = hi.max(field.get(x, y));
        }
    }
    Ok((lo, hi))
}

fn ac7_falloff_sanity() -> Outcome {
    let mut report = Vec::new();
    for n in TILE_SIZES {
        let (lo, hi) = interior_range(n, 4.4)?;
        ensure(lo >= 0.8 && hi <= 1.3, || format!("n={n} divisor 4.4: [{lo:.4}, {hi:.4}]"))?;
        let (lo10, _) = interior_range(n, 10.0)?;
        ensure(lo10 < 0.5, || format!("n={n} divisor 10: min {lo10:.4}"))?;
        if n == 16 {
            report.push(format!("n=16: [{lo:.3}, {hi:.3}] at 4.4, min {lo10:.4} at 10"));
        }
    }
    Ok(report.join("; "))
}

// 8 ───────────────────────────────────────────────────────────────────────────

/// Brute-force EER: FAR/FRR by direct counting at every distinct score and
/// at +inf (the curve is piecewise constant between distinct scores), then the
/// first crossing of the polyline through (FAR, FRR) with the diagonal.
fn oracle_eer(genuine: &[f64], impostor: &[f64]) -> f64 {
    let mut ts: Vec<f64> = genuine.iter().chain(impostor).copied().collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts.push(f64::INFINITY);
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .map(|&t| {
            let far = impostor.iter().filter(|&&s| s >= t).count() as f64 / impostor.len() as f64;
            let frr = genuine.iter().filter(|&&s| s < t).count() as f64 / genuine.len() as f64;
            (far, frr)
        })
        .collect();
    for w in pts.windows(2) {
        let ((f0, r0), (f1, r1)) = (w[0], w[1]);
        // solve f0 + u (f1 - f0) = r0 + u (r1 - r0)
        let denom = (f1 - f0) - (r1 - r0);
        if f0 == r0 {
            return f0;
        }
        if denom != 0.0 {
            let u = (r0 - f0) / denom;
            if (0.0..=1.0).contains(&u) {
                return f0 + u * (f1 - f0);
            }
        }
    }
    unreachable!("polyline runs from (1, 0) to (0, 1)")
}

fn ac8_eer_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let total = rng.random_range(2..=200);
        let ng = rng.random_range(1..total);
        let ni = total - ng;
        let discrete = rng.random_bool(0.5);
        let shift = rng.random_range(0.0..3.0);
        let mut draw = |offset: f64| -> f64 {
            if discrete {
                rng.random_range(0..15) as f64 + offset.round()
            } else {
                rng.random_range(0.0..10.0) + offset
            }
        };
        let genuine: Vec<f64> = (0..ng).map(|_| draw(shift)).collect();
        let impostor: Vec<f64> = (0..ni).map(|_| draw(0.0)).collect();
        let got = compute_eer(&ScoreSet {
            genuine: genuine.clone(),
            impostor: impostor.clone(),
        })
        .map_err(|e| e.to_string())?
        .eer;
        let want = oracle_eer(&genuine, &impostor);
        worst = worst.max((got - want).abs());
        ensure((got - want).abs() <= 1e-9, || format!("set {i}: {got} vs oracle {want}"))?;
    }
    let sep = compute_eer(&ScoreSet { genuine: vec![5.0, 6.0, 9.0], impostor: vec![1.0, 2.0, 4.9] }).unwrap().eer;
    ensure(sep == 0.0, || format!("separable EER {sep}"))?;
    let same = compute_eer(&ScoreSet { genuine: vec![0.5], impostor: vec![0.5] }).unwrap().eer;
    ensure(same == 0.5, || format!("identical EER {same}"))?;
    Ok(format!("1000 sets, max |impl - oracle| = {worst:.1e}; separable 0, identical 0.5"))
}

// 9 ───────────────────────────────────────────────────────────────────────────

fn ac9_matching_chain() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = common::build_corpus(dir.path(), 8, 4, 1, 60, 0.9, 9);
    let run = |cfg: &ChainConfig| eval_protocol(&corpus.pairs_file, cfg).map(|o| o.result.eer).map_err(|e| e.to_string());

    let knn_bidir = run(&ChainConfig {
        matcher: MatcherKind::KnnRt,
        ratio: Some(0.7),
        bidirectional: true,
        ..ChainConfig::default()
    })?;
    ensure(knn_bidir == 0.0, || format!("KNN+RT+bidirectional EER {knn_bidir}"))?;

    let ed_plain = run(&ChainConfig {
        matcher: MatcherKind::Ed,
        ..ChainConfig::default()
    })?;
    // far tighter than the perturbation: rejects genuine and impostor alike
    let ed_bad = run(&ChainConfig {
        matcher: MatcherKind::Ed,
        max_dist: Some(1e-3),
        ..ChainConfig::default()
    })?;
    ensure(ed_plain <= ed_bad, || format!("ED {ed_plain} > ED bad threshold {ed_bad}"))?;
    ensure(knn_bidir <= ed_plain, || format!("KNN {knn_bidir} > ED {ed_plain}"))?;
    Ok(format!(
        "{}+{} comparisons: KNN+RT(0.7)+bidir {knn_bidir}, ED {ed_plain}, ED(max 1e-3) {ed_bad}",
        corpus.genuine, corpus.impostor
    ))
}

// 10 ──────────────────────────────────────────────────────────────────────────

fn ac10_ransac_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let tol = 3.0;
    for inst in 0..50 {
        let n = rng.random_range(20..=100);
        let n_out = (0.3 * n as f64).round() as usize;
        let model = Similarity::from_params(
            rng.random_range(0.5..2.0),
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            rng.random_range(-100.0..100.0),
            rng.random_range(-100.0..100.0),
        );
        let mut outlier = vec![false; n];
        for k in rand::seq::index::sample(&mut rng, n, n_out) {
            outlier[k] = true;
        }
        let (mut ea, mut eb) = (Vec::new(), Vec::new());
        for &is_out in &outlier {
            let p = Complex64::new(rng.random_range(0.0..500.0), rng.random_range(0.0..500.0));
            let q = if is_out {
                loop {
                    let q = Complex64::new(rng.random_range(-200.0..800.0), rng.random_range(-200.0..800.0));
                    if (q - model.apply(p)).norm() > 10.0 * tol {
                        break q;
                    }
                }
            } else {
                model.apply(p)
            };
            ea.push(Descriptor { x: p.re, y: p.im, v: vec![0.0] });
            eb.push(Descriptor { x: q.re, y: q.im, v: vec![0.0] });
        }
        let a = DescriptorSet::new(ea).unwrap();
        let b = DescriptorSet::new(eb).unwrap();
        let pairs: Vec<MatchPair> = (0..n)
            .map(|i| MatchPair { idx_a: i, idx_b: i, dist: 0.0, ratio: None })
            .collect();
        let cfg = RansacConfig { iters: 1000, tol, seed: inst };
        let kept: Vec<usize> = ransac_filter(&pairs, &a, &b, &cfg)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|m| m.idx_a)
            .collect();
        let truth: Vec<usize> = (0..n).filter(|&i| !outlier[i]).collect();
        ensure(kept == truth, || format!("instance {inst}: kept {} of {} inliers", kept.len(), truth.len()))?;
    }
    Ok("50 instances, 30% outliers, exact inlier sets".into())
}

// 11 ──────────────────────────────────────────────────────────────────────────

fn ac11_io_round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..100 {
        let (w, h) = (rng.random_range(1..=80), rng.random_range(1..=80));
        let img = GrayImage::from_fn(w, h, |_, _| rng.random());
        for ext in ["pgm", "png"] {
            let p1 = dir.path().join(format!("{i}.{ext}"));
            let p2 = dir.path().join(format!("{i}b.{ext}"));
            save_image(&img, &p1).map_err(|e| e.to_string())?;
            let back = load_image(&p1).map_err(|e| e.to_string())?;
            save_image(&back, &p2).map_err(|e| e.to_string())?;
            let again = load_image(&p2).map_err(|e| e.to_string())?;
            ensure(back == img && again == img, || format!("image {i} ({w}x{h}) .{ext} differs"))?;
        }
    }
    Ok("100 random images, PGM and PNG bit-identical".into())
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 11] = [
        ("AC1  49-tile layer geometry", ac1_forty_nine_tiles),
        ("AC2  ILACS kernel fixtures", ac2_ilacs_fixtures),
        ("AC3  output range, no clamping", ac3_range_property),
        ("AC4  effective weights sum to one", ac4_sum_to_one),
        ("AC5  checkerboard identity", ac5_identity_checkerboard),
        ("AC6  blocky-effect reduction", ac6_blocky_reduction),
        ("AC7  falloff sanity", ac7_falloff_sanity),
        ("AC8  EER vs brute-force oracle", ac8_eer_oracle),
        ("AC9  matching chain ordering", ac9_matching_chain),
        ("AC10 RANSAC inlier recovery", ac10_ransac_recovery),
        ("AC11 image I/O round trip", ac11_io_round_trip),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                println!("FAIL {name}: {detail}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
