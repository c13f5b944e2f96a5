//! Layered Gaussian-weighted overlapping tiles.
//!
//! Four tile layers are laid over the image: the base layer `B` at offset
//! `(0, 0)`, `H` shifted by half a tile vertically, `V` shifted by half a tile
//! horizontally and `C` shifted in both axes. The shifted layers straddle the
//! base layer's tile edges and vertices. Every tile is stretched with ILACS,
//! multiplied by a radial Gaussian centred on the tile (a pre-multiplied
//! alpha), and the layers are summed. The per-pixel sum is divided by the
//! accumulated weight so that the effective weights at each pixel add up to
//! one, including along the image border where fewer tiles overlap.
//!
//! Accumulation runs in a fixed layer-then-tile order, so results are
//! bit-identical regardless of how the per-tile work is scheduled.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ilacs::{ilacs_tile, partition, quantize, tile_stats, validate_tile_size, TileRect};
use crate::image::{check_mask, BinaryMask, GrayImage};

/// Default ratio `n / sigma`.
pub const DEFAULT_SIGMA_DIVISOR: f64 = 4.4;

/// Accepted range for the sigma divisor.
pub const SIGMA_DIVISOR_RANGE: (f64, f64) = (0.5, 20.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerId {
    /// Base layer.
    B,
    /// Centred on the base layer's horizontal edges.
    H,
    /// Centred on the base layer's vertical edges.
    V,
    /// Centred on the base layer's tile vertices.
    C,
}

impl fmt::Display for LayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LayerId::B => "B",
            LayerId::H => "H",
            LayerId::V => "V",
            LayerId::C => "C",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub layer_id: LayerId,
    pub off_x: usize,
    pub off_y: usize,
}

/// The four layers `B(0,0)`, `H(0,n/2)`, `V(n/2,0)`, `C(n/2,n/2)`.
pub fn layer_specs(n: usize) -> Result<[LayerSpec; 4]> {
    validate_tile_size(n)?;
    let half = n / 2;
    let spec = |layer_id, off_x, off_y| LayerSpec {
        layer_id,
        off_x,
        off_y,
    };
    Ok([
        spec(LayerId::B, 0, 0),
        spec(LayerId::H, 0, half),
        spec(LayerId::V, half, 0),
        spec(LayerId::C, half, half),
    ])
}

/// Tiles of one layer.
///
/// The base layer is the plain partition. In a shifted axis a tile is kept
/// only if it extends past `n / 2` pixels, i.e. it straddles a base-layer
/// tile edge; the half-tile slivers left over at the far border cover no
/// edge and are dropped. A `4n x 4n` image therefore uses
/// `16 + 12 + 12 + 9 = 49` tiles.
pub fn layer_tiles(width: usize, height: usize, n: usize, spec: &LayerSpec) -> Result<Vec<TileRect>> {
    let half = n / 2;
    let mut tiles = partition(width, height, n, spec.off_x, spec.off_y)?;
    tiles.retain(|t| (spec.off_x == 0 || t.w > half) && (spec.off_y == 0 || t.h > half));
    Ok(tiles)
}

/// All four layers with their tiles, in `B, H, V, C` order.
pub fn layered_tiles(width: usize, height: usize, n: usize) -> Result<Vec<(LayerSpec, Vec<TileRect>)>> {
    layer_specs(n)?
        .iter()
        .map(|spec| Ok((*spec, layer_tiles(width, height, n, spec)?)))
        .collect()
}

/// Tile size and Gaussian falloff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendConfig {
    pub n: usize,
    /// `sigma = n / sigma_divisor`.
    pub sigma_divisor: f64,
}

impl BlendConfig {
    pub fn new(n: usize, sigma_divisor: f64) -> Result<Self> {
        let cfg = Self { n, sigma_divisor };
        cfg.validate()?;
        if !(3.0..=6.0).contains(&sigma_divisor) {
            log::warn!(
                "sigma divisor {sigma_divisor} is outside [3, 6]; expect dark or visible tile edges"
            );
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        validate_tile_size(self.n)?;
        let (lo, hi) = SIGMA_DIVISOR_RANGE;
        if !(lo..=hi).contains(&self.sigma_divisor) {
            return Err(Error::param(
                "sigma_divisor",
                format!("{} is outside [{lo}, {hi}]", self.sigma_divisor),
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.n as f64 / self.sigma_divisor
    }
}

impl Default for BlendConfig {
    fn default() -> Self {
        Self {
            n: 16,
            sigma_divisor: DEFAULT_SIGMA_DIVISOR,
        }
    }
}

/// Unnormalised isotropic Gaussian with peak 1 at offset `(0, 0)`.
#[inline]
pub fn gaussian_weight(dx: f64, dy: f64, sigma: f64) -> f64 {
    (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
}

/// Per-pixel weights of one tile, tile-local row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMask {
    pub w: usize,
    pub h: usize,
    pub values: Vec<f64>,
}

impl WeightMask {
    #[inline]
    pub fn get(&self, dx: usize, dy: usize) -> f64 {
        self.values[dy * self.w + dx]
    }
}

/// Gaussian weights evaluated at pixel centres relative to the tile's nominal
/// centre.
pub fn gaussian_weights(tile: &TileRect, sigma: f64) -> Result<WeightMask> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", format!("{sigma} must be positive and finite")));
    }
    let values = tile
        .coords()
        .map(|(x, y)| {
            gaussian_weight(
                x as f64 + 0.5 - tile.nominal_cx,
                y as f64 + 0.5 - tile.nominal_cy,
                sigma,
            )
        })
        .collect();
    Ok(WeightMask {
        w: tile.w,
        h: tile.h,
        values,
    })
}

/// Weights of an unclipped `n x n` tile. Clipped tiles share their anchor
/// with the unclipped tile, so their weights are the top-left sub-block.
fn full_tile_weights(cfg: &BlendConfig) -> Result<WeightMask> {
    let n = cfg.n;
    let tile = TileRect {
        x0: 0,
        y0: 0,
        w: n,
        h: n,
        nominal_cx: n as f64 / 2.0,
        nominal_cy: n as f64 / 2.0,
    };
    gaussian_weights(&tile, cfg.sigma())
}

/// Pre-multiplied value and weight sums per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumBuffers {
    pub width: usize,
    pub height: usize,
    /// Sum of `weight * ilacs_value`.
    pub value_sum: Vec<f64>,
    /// Sum of `weight`.
    pub weight_sum: Vec<f64>,
}

/// Final image plus the number of pixels whose value had to be clamped.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub image: GrayImage,
    pub clamped: usize,
}

impl AccumBuffers {
    fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            value_sum: vec![0.0; width * height],
            weight_sum: vec![0.0; width * height],
        }
    }

    /// Normalised real value at each pixel, `None` where nothing accumulated.
    pub fn normalized(&self) -> Vec<Option<f64>> {
        self.value_sum
            .iter()
            .zip(&self.weight_sum)
            .map(|(&v, &w)| (w > 0.0).then(|| v / w))
            .collect()
    }

    /// Divides by the weight sum and rounds half away from zero. Masked
    /// pixels become 0.
    pub fn resolve(&self, mask: Option<&BinaryMask>) -> Resolved {
        let mut clamped = 0;
        let mut pixels = Vec::with_capacity(self.width * self.height);
        for (i, (&v, &w)) in self.value_sum.iter().zip(&self.weight_sum).enumerate() {
            let masked = mask.is_some_and(|m| !m.bits()[i]);
            if masked || w <= 0.0 {
                pixels.push(0);
                continue;
            }
            let r = (v / w).round();
            if !(0.0..=255.0).contains(&r) {
                clamped += 1;
            }
            pixels.push(quantize(r));
        }
        Resolved {
            image: GrayImage::new(self.width, self.height, pixels).expect("dimensions are non-zero"),
            clamped,
        }
    }
}

/// Runs all four layers and returns the raw accumulation buffers.
pub fn composite(image: &GrayImage, mask: Option<&BinaryMask>, cfg: &BlendConfig) -> Result<AccumBuffers> {
    cfg.validate()?;
    check_mask(image, mask)?;
    let (width, height) = image.dimensions();
    let weights = full_tile_weights(cfg)?;
    let layers = layered_tiles(width, height, cfg.n)?;

    let mut acc = AccumBuffers::new(width, height);
    for (_, tiles) in &layers {
        let stretched: Vec<Vec<u8>> = tiles
            .par_iter()
            .map(|tile| {
                let stats = tile_stats(image, tile, mask);
                ilacs_tile(image, tile, &stats, mask)
            })
            .collect();
        for (tile, values) in tiles.iter().zip(&stretched) {
            for dy in 0..tile.h {
                let row = (tile.y0 + dy) * width + tile.x0;
                for dx in 0..tile.w {
                    let w = weights.get(dx, dy);
                    acc.value_sum[row + dx] += w * f64::from(values[dy * tile.w + dx]);
                    acc.weight_sum[row + dx] += w;
                }
            }
        }
    }
    Ok(acc)
}

/// Intensity-limited stretch blended across four overlapping layers.
pub fn enhance(image: &GrayImage, mask: Option<&BinaryMask>, cfg: &BlendConfig) -> Result<GrayImage> {
    Ok(composite(image, mask, cfg)?.resolve(mask).image)
}

/// Real-valued per-pixel map, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl WeightField {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn for_each_weight(
    width: usize,
    height: usize,
    cfg: &BlendConfig,
    mut f: impl FnMut(usize, f64),
) -> Result<()> {
    cfg.validate()?;
    if width == 0 || height == 0 {
        return Err(Error::param("dimensions", "width and height must be at least 1"));
    }
    let weights = full_tile_weights(cfg)?;
    for (_, tiles) in layered_tiles(width, height, cfg.n)? {
        for tile in &tiles {
            for dy in 0..tile.h {
                let row = (tile.y0 + dy) * width + tile.x0;
                for dx in 0..tile.w {
                    f(row + dx, weights.get(dx, dy));
                }
            }
        }
    }
    Ok(())
}

/// Total raw Gaussian weight per pixel before normalisation.
///
/// Values well below 1 show up as dark tile edges with raw summation; values
/// well above 1 let the tile structure through.
pub fn weight_field(width: usize, height: usize, cfg: &BlendConfig) -> Result<WeightField> {
    let mut values = vec![0.0; width * height];
    for_each_weight(width, height, cfg, |i, w| values[i] += w)?;
    Ok(WeightField {
        width,
        height,
        values,
    })
}

/// Sum over covering tiles of `weight / weight_sum` at each unmasked pixel.
/// Masked pixels read 0.
pub fn effective_weight_sum(
    width: usize,
    height: usize,
    mask: Option<&BinaryMask>,
    cfg: &BlendConfig,
) -> Result<WeightField> {
    let raw = weight_field(width, height, cfg)?;
    let mut values = vec![0.0; width * height];
    for_each_weight(width, height, cfg, |i, w| values[i] += w / raw.values[i])?;
    if let Some(m) = mask {
        if m.dimensions() != (width, height) {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                found: m.dimensions(),
            });
        }
        for (v, &fg) in values.iter_mut().zip(m.bits()) {
            if !fg {
                *v = 0.0;
            }
        }
    }
    Ok(WeightField {
        width,
        height,
        values,
    })
}
