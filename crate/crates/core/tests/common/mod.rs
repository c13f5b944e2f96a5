#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ilacs::matching::{save_descriptors, Descriptor, DescriptorSet, Similarity};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DIM: usize = 128;

pub struct Corpus {
    pub pairs_file: PathBuf,
    pub genuine: usize,
    pub impostor: usize,
}

fn random_vector(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..DIM).map(|_| rng.random::<f64>()).collect()
}

/// Synthetic verification corpus.
///
/// Each subject owns a base set of keypoints. Every sample of a subject
/// keeps `shared` of the base vectors (slightly perturbed, moved by a random
/// similarity transform) and adds fresh random vectors for the rest.
/// Templates are the first `templates` samples of each subject; the remaining
/// samples are probes compared against every subject's template.
pub fn build_corpus(
    dir: &Path,
    subjects: usize,
    samples: usize,
    templates: usize,
    per_set: usize,
    shared: f64,
    seed: u64,
) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_shared = (per_set as f64 * shared).round() as usize;
    let mut names = vec![vec![String::new(); samples]; subjects];
    for (s, subject_names) in names.iter_mut().enumerate() {
        let base: Vec<(f64, f64, Vec<f64>)> = (0..per_set)
            .map(|_| (rng.random_range(0.0..300.0), rng.random_range(0.0..300.0), random_vector(&mut rng)))
            .collect();
        for (k, name) in subject_names.iter_mut().enumerate() {
            let t = Similarity::from_params(
                rng.random_range(0.9..1.1),
                rng.random_range(-0.2..0.2),
                rng.random_range(-20.0..20.0),
                rng.random_range(-20.0..20.0),
            );
            let mut entries = Vec::with_capacity(per_set);
            for (x, y, v) in base.iter().take(n_shared) {
                let p = t.apply(Complex64::new(*x, *y));
                let v = v.iter().map(|c| (c + rng.random_range(-0.01..0.01)).max(0.0)).collect();
                entries.push(Descriptor { x: p.re, y: p.im, v });
            }
            for _ in n_shared..per_set {
                entries.push(Descriptor {
                    x: rng.random_range(0.0..300.0),
                    y: rng.random_range(0.0..300.0),
                    v: random_vector(&mut rng),
                });
            }
            *name = format!("s{s:02}_{k}.csv");
            save_descriptors(&DescriptorSet::new(entries).unwrap(), dir.join(&*name)).unwrap();
        }
    }

    let mut text = String::new();
    let (mut genuine, mut impostor) = (0, 0);
    for (s, subject_names) in names.iter().enumerate() {
        for probe in &subject_names[templates..] {
            for (t, other) in names.iter().enumerate() {
                let label = if s == t { "genuine" } else { "impostor" };
                if s == t {
                    genuine += 1;
                } else {
                    impostor += 1;
                }
                let tpl: Vec<&str> = other[..templates].iter().map(String::as_str).collect();
                let _ = writeln!(text, "{label},{probe},{}", tpl.join(";"));
            }
        }
    }
    let pairs_file = dir.join("pairs.txt");
    std::fs::write(&pairs_file, text).unwrap();
    Corpus {
        pairs_file,
        genuine,
        impostor,
    }
}
