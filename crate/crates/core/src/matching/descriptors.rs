use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::BinaryMask;

/// A keypoint location with its descriptor vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    pub x: f64,
    pub y: f64,
    pub v: Vec<f64>,
}

/// Keypoints sharing one descriptor dimension. An empty set has `dim == 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DescriptorSet {
    dim: usize,
    entries: Vec<Descriptor>,
}

impl DescriptorSet {
    pub fn new(entries: Vec<Descriptor>) -> Result<Self> {
        let dim = entries.first().map_or(0, |e| e.v.len());
        if !entries.is_empty() && dim == 0 {
            return Err(Error::InvalidDescriptor("descriptor dimension must be at least 1".into()));
        }
        if let Some((i, e)) = entries.iter().enumerate().find(|(_, e)| e.v.len() != dim) {
            return Err(Error::InvalidDescriptor(format!(
                "entry {i} has dimension {}, expected {dim}",
                e.v.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Descriptor] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &Descriptor {
        &self.entries[i]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let _ = write!(s, "{},{}", e.x, e.y);
            for c in &e.v {
                let _ = write!(s, ",{c}");
            }
            s.push('\n');
        }
        s
    }
}

/// Parses headerless `x,y,v0,...,v{d-1}` CSV. The dimension is fixed by the
/// first non-blank line.
pub fn parse_descriptors(text: &str) -> Result<DescriptorSet> {
    let mut entries = Vec::new();
    let mut dim = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .enumerate()
            .map(|(col, f)| {
                let f = f.trim();
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::DescriptorFormat {
                        line: line_no,
                        reason: format!("field {} ({f:?}) is not a finite number", col + 1),
                    })
            })
            .collect::<Result<_>>()?;
        if fields.len() < 3 {
            return Err(Error::DescriptorFormat {
                line: line_no,
                reason: format!("expected x, y and at least one component, found {} fields", fields.len()),
            });
        }
        let d = fields.len() - 2;
        match dim {
            None => dim = Some(d),
            Some(expected) if expected != d => {
                return Err(Error::DescriptorFormat {
                    line: line_no,
                    reason: format!("descriptor has {d} components, expected {expected}"),
                })
            }
            _ => {}
        }
        entries.push(Descriptor {
            x: fields[0],
            y: fields[1],
            v: fields[2..].to_vec(),
        });
    }
    DescriptorSet::new(entries)
}

pub fn load_descriptors(path: impl AsRef<Path>) -> Result<DescriptorSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_descriptors(&text)
}

pub fn save_descriptors(set: &DescriptorSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, set.to_csv()).map_err(|e| Error::io(path, e))
}

/// RootSIFT: L1-normalise each vector, then take the element-wise square
/// root. Zero vectors pass through unchanged.
pub fn root_sift(set: &DescriptorSet) -> Result<DescriptorSet> {
    let mut entries = Vec::with_capacity(set.len());
    for (i, e) in set.entries().iter().enumerate() {
        if let Some(c) = e.v.iter().find(|&&c| c < 0.0) {
            return Err(Error::InvalidDescriptor(format!(
                "entry {i} has negative component {c}"
            )));
        }
        let l1: f64 = e.v.iter().sum();
        let v = if l1 > 0.0 {
            e.v.iter().map(|c| (c / l1).sqrt()).collect()
        } else {
            e.v.clone()
        };
        entries.push(Descriptor { x: e.x, y: e.y, v });
    }
    DescriptorSet::new(entries)
}

/// Keeps keypoints whose rounded position lands on a foreground pixel.
pub fn filter_keypoints(set: &DescriptorSet, mask: &BinaryMask) -> DescriptorSet {
    let (w, h) = mask.dimensions();
    let entries = set
        .entries()
        .iter()
        .filter(|e| {
            let (x, y) = (e.x.round(), e.y.round());
            x >= 0.0 && y >= 0.0 && (x as usize) < w && (y as usize) < h && mask.get(x as usize, y as usize)
        })
        .cloned()
        .collect();
    DescriptorSet {
        dim: set.dim,
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(dim: usize, seed: usize) -> String {
        let mut s = format!("{}.5,{}", seed, seed * 2);
        for k in 0..dim {
            let _ = write!(s, ",{}", (k * 7 + seed) % 13);
        }
        s
    }

    #[test]
    fn parses_two_entries() {
        let text = format!("{}\n{}\n", line(128, 1), line(128, 2));
        let set = parse_descriptors(&text).unwrap();
        assert_eq!((set.dim(), set.len()), (128, 2));
        assert_eq!(set.get(0).x, 1.5);
        assert_eq!(set.get(1).y, 4.0);
        assert_eq!(parse_descriptors(&set.to_csv()).unwrap(), set);
    }

    #[test]
    fn empty_file_is_empty_set() {
        let set = parse_descriptors("").unwrap();
        assert_eq!((set.dim(), set.len()), (0, 0));
        assert!(parse_descriptors("\n\n").unwrap().is_empty());
    }

    #[test]
    fn ragged_and_bad_rows_report_line() {
        let text = format!("{}\n{}\n", line(128, 1), line(127, 2));
        match parse_descriptors(&text) {
            Err(Error::DescriptorFormat { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse_descriptors("1,2,3\n1,x,3\n") {
            Err(Error::DescriptorFormat { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_descriptors("1,2\n").is_err());
    }

    #[test]
    fn root_sift_fixtures() {
        let set = DescriptorSet::new(vec![
            Descriptor { x: 0.0, y: 0.0, v: vec![1.0, 1.0, 2.0] },
            Descriptor { x: 1.0, y: 1.0, v: vec![0.0, 0.0, 0.0] },
        ])
        .unwrap();
        let r = root_sift(&set).unwrap();
        let v = &r.get(0).v;
        assert!((v[0] - 0.5).abs() < 1e-15 && (v[1] - 0.5).abs() < 1e-15);
        assert!((v[2] - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.get(1).v, vec![0.0; 3]);

        let neg = DescriptorSet::new(vec![Descriptor { x: 0.0, y: 0.0, v: vec![1.0, -0.1] }]).unwrap();
        assert!(matches!(root_sift(&neg), Err(Error::InvalidDescriptor(_))));
    }

    #[test]
    fn keypoint_filtering() {
        let set = DescriptorSet::new(vec![
            Descriptor { x: 1.2, y: 0.6, v: vec![1.0] },
            Descriptor { x: -1.0, y: 5.0, v: vec![1.0] },
            Descriptor { x: 3.4, y: 3.4, v: vec![1.0] },
            Descriptor { x: 9.0, y: 1.0, v: vec![1.0] },
        ])
        .unwrap();
        let all = BinaryMask::filled(10, 10, true);
        let kept = filter_keypoints(&set, &all);
        assert_eq!(kept.len(), 3);
        assert!(kept.entries().iter().all(|e| e.x >= 0.0));

        assert!(filter_keypoints(&set, &BinaryMask::filled(10, 10, false)).is_empty());

        let left = BinaryMask::from_fn(10, 10, |x, _| x < 3);
        let kept = filter_keypoints(&set, &left);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept.get(0).x, 1.2);
    }

    proptest! {
        #[test]
        fn root_sift_is_unit_norm(v in proptest::collection::vec(0.0f64..100.0, 1..64)) {
            prop_assume!(v.iter().sum::<f64>() > 0.0);
            let set = DescriptorSet::new(vec![Descriptor { x: 0.0, y: 0.0, v }]).unwrap();
            let r = root_sift(&set).unwrap();
            let norm: f64 = r.get(0).v.iter().map(|c| c * c).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }
    }
}
