//! Resampling, blurring, histograms and matte erosion.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ilacs::quantize;
use crate::image::{check_mask, BinaryMask, GrayImage};

/// Smallest accepted blur sigma.
pub const MIN_BLUR_SIGMA: f64 = 0.1;

fn scaled_dim(dim: usize, factor: f64) -> usize {
    // the epsilon keeps e.g. 100 * 0.29 from flooring to 28
    ((dim as f64 * factor + 1e-9).floor() as usize).max(1)
}

fn check_factor(factor: f64) -> Result<()> {
    if !(factor > 0.0 && factor <= 1.0) {
        return Err(Error::param("factor", format!("{factor} is outside (0, 1]")));
    }
    Ok(())
}

/// Bilinear sampling of `src` onto an `out_w x out_h` grid with pixel-centre
/// alignment.
fn resample_bilinear(src: &GrayImage, out_w: usize, out_h: usize) -> Vec<f64> {
    let (w, h) = src.dimensions();
    let sx = w as f64 / out_w as f64;
    let sy = h as f64 / out_h as f64;
    let axis = |i: usize, scale: f64, len: usize| {
        let c = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
        let i0 = c.floor() as usize;
        let i1 = (i0 + 1).min(len - 1);
        (i0, i1, c - i0 as f64)
    };
    let mut out = Vec::with_capacity(out_w * out_h);
    for y in 0..out_h {
        let (y0, y1, fy) = axis(y, sy, h);
        for x in 0..out_w {
            let (x0, x1, fx) = axis(x, sx, w);
            let p = |xx, yy| f64::from(src.get(xx, yy));
            let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
            let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
            out.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    out
}

/// Bilinear downscale to `floor(dim * factor)` (at least 1) in each axis.
pub fn downscale(image: &GrayImage, factor: f64) -> Result<GrayImage> {
    check_factor(factor)?;
    let out_w = scaled_dim(image.width(), factor);
    let out_h = scaled_dim(image.height(), factor);
    if (out_w, out_h) == image.dimensions() {
        return Ok(image.clone());
    }
    let pixels = resample_bilinear(image, out_w, out_h)
        .into_iter()
        .map(quantize)
        .collect();
    GrayImage::new(out_w, out_h, pixels)
}

/// Downscales a matte the same way as its image, keeping pixels whose
/// interpolated coverage is at least one half.
pub fn downscale_mask(mask: &BinaryMask, factor: f64) -> Result<BinaryMask> {
    check_factor(factor)?;
    let out_w = scaled_dim(mask.width(), factor);
    let out_h = scaled_dim(mask.height(), factor);
    if (out_w, out_h) == mask.dimensions() {
        return Ok(mask.clone());
    }
    let bits = resample_bilinear(&mask.to_image(), out_w, out_h)
        .into_iter()
        .map(|v| v >= 127.5)
        .collect();
    BinaryMask::new(out_w, out_h, bits)
}

/// Normalised 1-D Gaussian kernel of radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > MIN_BLUR_SIGMA && sigma.is_finite()) {
        return Err(Error::param(
            "sigma",
            format!("{sigma} must be finite and greater than {MIN_BLUR_SIGMA}"),
        ));
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    Ok(k)
}

/// Separable Gaussian blur with clamp-to-edge borders.
pub fn gaussian_blur(image: &GrayImage, sigma: f64) -> Result<GrayImage> {
    let kernel = gaussian_kernel(sigma)?;
    let radius = (kernel.len() / 2) as isize;
    let (w, h) = image.dimensions();
    let clamp = |i: isize, len: usize| i.clamp(0, len as isize - 1) as usize;

    let mut horiz = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &c) in kernel.iter().enumerate() {
                let sx = clamp(x as isize + k as isize - radius, w);
                acc += c * f64::from(image.get(sx, y));
            }
            horiz[y * w + x] = acc;
        }
    }
    let mut pixels = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &c) in kernel.iter().enumerate() {
                let sy = clamp(y as isize + k as isize - radius, h);
                acc += c * horiz[sy * w + x];
            }
            pixels.push(quantize(acc));
        }
    }
    GrayImage::new(w, h, pixels)
}

/// 256-bin intensity histogram over unmasked pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub bins: [u64; 256],
    pub total: u64,
}

impl Histogram {
    /// One `bin,count` line per bin, no header.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(256 * 8);
        for (bin, count) in self.bins.iter().enumerate() {
            let _ = writeln!(s, "{bin},{count}");
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

pub fn histogram(image: &GrayImage, mask: Option<&BinaryMask>) -> Result<Histogram> {
    check_mask(image, mask)?;
    let mut bins = [0u64; 256];
    match mask {
        None => image.pixels().iter().for_each(|&p| bins[p as usize] += 1),
        Some(m) => image
            .pixels()
            .iter()
            .zip(m.bits())
            .filter(|(_, &fg)| fg)
            .for_each(|(&p, _)| bins[p as usize] += 1),
    }
    Ok(Histogram {
        bins,
        total: bins.iter().sum(),
    })
}

/// Erosion by a `(2r+1) x (2r+1)` square. Pixels outside the image count as
/// background, so foreground touching the border erodes.
pub fn erode_mask(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = mask.dimensions();
    // summed-area table of foreground counts, (w+1) x (h+1)
    let stride = w + 1;
    let mut sat = vec![0u32; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0u32;
        for x in 0..w {
            row += u32::from(mask.get(x, y));
            sat[(y + 1) * stride + x + 1] = sat[y * stride + x + 1] + row;
        }
    }
    let side = 2 * radius + 1;
    let full = (side * side) as u32;
    BinaryMask::from_fn(w, h, |x, y| {
        if x < radius || y < radius || x + radius >= w || y + radius >= h {
            return false;
        }
        let (x0, y0, x1, y1) = (x - radius, y - radius, x + radius + 1, y + radius + 1);
        let count = sat[y1 * stride + x1] + sat[y0 * stride + x0] - sat[y0 * stride + x1] - sat[y1 * stride + x0];
        count == full
    })
}
