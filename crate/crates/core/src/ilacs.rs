//! Tile partitioning and per-tile contrast stretching.
//!
//! Two kernels are provided. The adaptive contrast stretch (ACS) maps a
//! tile's `[min, max]` onto `[0, 255]` as a real value. The
//! intensity-limited variant (ILACS) replaces the real gain with the integer
//! `floor(255 / (max - min))`, which caps the stretch at a step function of
//! the tile's local range and keeps every output in `[0, 255]` without
//! clamping.
//!
//! When a matte is supplied, masked pixels are excluded from the tile
//! statistics and written as 0.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{check_mask, BinaryMask, GrayImage};

/// One (possibly clipped) `n x n` tile of a layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TileRect {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
    /// Center of the unclipped tile, `anchor + n / 2`.
    pub nominal_cx: f64,
    pub nominal_cy: f64,
}

impl TileRect {
    #[inline]
    pub fn area(&self) -> usize {
        self.w * self.h
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x0 + self.w && y >= self.y0 && y < self.y0 + self.h
    }

    /// Iterates the tile's pixel coordinates in row-major order.
    pub fn coords(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.y0..self.y0 + self.h).flat_map(move |y| (self.x0..self.x0 + self.w).map(move |x| (x, y)))
    }
}

/// Min/max over the unmasked pixels of a tile and the ILACS gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileStats {
    pub min_val: Option<u8>,
    pub max_val: Option<u8>,
    /// `floor(255 / (max - min))` when `max > min`, otherwise 0.
    pub multiplier: u32,
}

impl TileStats {
    /// Range `max - min`, or `None` for a fully masked tile.
    pub fn range(&self) -> Option<u8> {
        match (self.min_val, self.max_val) {
            (Some(lo), Some(hi)) => Some(hi - lo),
            _ => None,
        }
    }

    fn from_extrema(min_val: Option<u8>, max_val: Option<u8>) -> Self {
        let multiplier = match (min_val, max_val) {
            (Some(lo), Some(hi)) if hi > lo => 255 / u32::from(hi - lo),
            _ => 0,
        };
        Self {
            min_val,
            max_val,
            multiplier,
        }
    }
}

/// Which per-tile stretch is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StretchKernel {
    /// Real-valued full-range stretch.
    Acs,
    /// Floored integer gain.
    Ilacs,
}

pub(crate) fn validate_tile_size(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidTileSize(n));
    }
    Ok(())
}

/// Splits the region `x >= off_x, y >= off_y` into `n x n` tiles anchored at
/// `(off_x + i*n, off_y + j*n)`. Right and bottom tiles are clipped to the
/// image. Tiles are returned row by row.
pub fn partition(
    width: usize,
    height: usize,
    n: usize,
    off_x: usize,
    off_y: usize,
) -> Result<Vec<TileRect>> {
    validate_tile_size(n)?;
    if width == 0 || height == 0 {
        return Err(Error::param("dimensions", "width and height must be at least 1"));
    }
    if off_x >= n || off_y >= n {
        return Err(Error::param(
            "offset",
            format!("offsets ({off_x}, {off_y}) must be smaller than the tile size {n}"),
        ));
    }
    let half = n as f64 / 2.0;
    let mut tiles = Vec::new();
    for y0 in (off_y..height).step_by(n) {
        let h = n.min(height - y0);
        for x0 in (off_x..width).step_by(n) {
            let w = n.min(width - x0);
            tiles.push(TileRect {
                x0,
                y0,
                w,
                h,
                nominal_cx: x0 as f64 + half,
                nominal_cy: y0 as f64 + half,
            });
        }
    }
    Ok(tiles)
}

/// Tile extrema over unmasked pixels.
pub fn tile_stats(image: &GrayImage, tile: &TileRect, mask: Option<&BinaryMask>) -> TileStats {
    let mut lo = u8::MAX;
    let mut hi = u8::MIN;
    let mut seen = false;
    for y in tile.y0..tile.y0 + tile.h {
        let row = &image.pixels()[y * image.width() + tile.x0..y * image.width() + tile.x0 + tile.w];
        match mask {
            None => {
                for &p in row {
                    lo = lo.min(p);
                    hi = hi.max(p);
                }
                seen = true;
            }
            Some(m) => {
                for (dx, &p) in row.iter().enumerate() {
                    if m.get(tile.x0 + dx, y) {
                        lo = lo.min(p);
                        hi = hi.max(p);
                        seen = true;
                    }
                }
            }
        }
    }
    if seen {
        TileStats::from_extrema(Some(lo), Some(hi))
    } else {
        TileStats::from_extrema(None, None)
    }
}

#[inline]
fn unmasked(mask: Option<&BinaryMask>, x: usize, y: usize) -> bool {
    mask.is_none_or(|m| m.get(x, y))
}

/// Real-valued stretch `(p - min) / (max - min) * 255`, tile-local row-major.
///
/// Uniform or fully masked tiles and masked pixels map to 0.
pub fn acs_tile(
    image: &GrayImage,
    tile: &TileRect,
    stats: &TileStats,
    mask: Option<&BinaryMask>,
) -> Vec<f64> {
    let (lo, range) = match (stats.min_val, stats.range()) {
        (Some(lo), Some(r)) if r > 0 => (lo, f64::from(r)),
        _ => return vec![0.0; tile.area()],
    };
    tile.coords()
        .map(|(x, y)| {
            if unmasked(mask, x, y) {
                f64::from(image.get(x, y) - lo) / range * 255.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Integer stretch `(p - min) * floor(255 / (max - min))`, tile-local row-major.
///
/// The product never exceeds 255. Uniform or fully masked tiles and masked
/// pixels map to 0.
pub fn ilacs_tile(
    image: &GrayImage,
    tile: &TileRect,
    stats: &TileStats,
    mask: Option<&BinaryMask>,
) -> Vec<u8> {
    let lo = match stats.min_val {
        Some(lo) if stats.multiplier > 0 => lo,
        _ => return vec![0; tile.area()],
    };
    tile.coords()
        .map(|(x, y)| {
            if unmasked(mask, x, y) {
                let v = u32::from(image.get(x, y) - lo) * stats.multiplier;
                debug_assert!(v <= 255);
                v as u8
            } else {
                0
            }
        })
        .collect()
}

/// Single-layer, non-blended tile stretch written back into a full image.
///
/// This is the blocky baseline: each tile is remapped independently, so
/// neighbouring pixels in different tiles can land far apart.
pub fn enhance_tiles(
    image: &GrayImage,
    mask: Option<&BinaryMask>,
    n: usize,
    kernel: StretchKernel,
) -> Result<GrayImage> {
    check_mask(image, mask)?;
    let tiles = partition(image.width(), image.height(), n, 0, 0)?;
    let outputs: Vec<Vec<u8>> = tiles
        .par_iter()
        .map(|tile| {
            let stats = tile_stats(image, tile, mask);
            match kernel {
                StretchKernel::Ilacs => ilacs_tile(image, tile, &stats, mask),
                StretchKernel::Acs => acs_tile(image, tile, &stats, mask)
                    .into_iter()
                    .map(quantize)
                    .collect(),
            }
        })
        .collect();
    let mut out = GrayImage::filled(image.width(), image.height(), 0);
    for (tile, values) in tiles.iter().zip(outputs) {
        for ((x, y), v) in tile.coords().zip(values) {
            out.set(x, y, v);
        }
    }
    Ok(out)
}

/// Non-blended tile stretch using the real-valued ACS kernel.
pub fn enhance_acs_tiles(image: &GrayImage, mask: Option<&BinaryMask>, n: usize) -> Result<GrayImage> {
    enhance_tiles(image, mask, n, StretchKernel::Acs)
}

/// Non-blended tile stretch using the floored ILACS kernel.
pub fn enhance_ilacs_tiles(image: &GrayImage, mask: Option<&BinaryMask>, n: usize) -> Result<GrayImage> {
    enhance_tiles(image, mask, n, StretchKernel::Ilacs)
}

/// Round half away from zero, clamped to the 8-bit range.
#[inline]
pub(crate) fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}
