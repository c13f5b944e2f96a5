//! Grayscale image and mask I/O.
//!
//! Input: PGM (`P2` ASCII or `P5` binary, maxval 255) and PNG. The input
//! format is detected from the file's magic bytes. Colour PNGs are reduced to
//! luma with `round(0.299 R + 0.587 G + 0.114 B)`; alpha is ignored.
//!
//! Output: PGM `P5` for `.pgm`/`.pnm`, 8-bit grayscale PNG for `.png`. Any
//! other extension, lossy formats included, is rejected.

use std::fs;
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, GrayImage};

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Pgm,
    Png,
}

impl OutputFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default();
        match ext.as_str() {
            "pgm" | "pnm" => Ok(OutputFormat::Pgm),
            "png" => Ok(OutputFormat::Png),
            "" => Err(Error::UnsupportedOutput(format!(
                "{} has no extension; use .pgm or .png",
                path.display()
            ))),
            other => Err(Error::UnsupportedOutput(format!(
                ".{other} is not supported; use .pgm or .png"
            ))),
        }
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        Error::UnsupportedDepth(msg) => Error::UnsupportedDepth(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Decodes PGM or PNG bytes.
pub fn decode_image(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.starts_with(PNG_MAGIC) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else if bytes.len() >= 2 && bytes[0] == b'P' && bytes[1].is_ascii_digit() {
        Err(Error::Format(format!(
            "netpbm variant P{} is not a grayscale PGM",
            bytes[1] as char
        )))
    } else {
        Err(Error::Format("unrecognised image format (expected PGM or PNG)".into()))
    }
}

pub fn save_image(image: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = match OutputFormat::from_path(path)? {
        OutputFormat::Pgm => encode_pgm(image),
        OutputFormat::Png => encode_png(image)?,
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Loads a matte; any non-zero pixel is foreground.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    Ok(BinaryMask::from_image(&load_image(path)?))
}

/// Writes a matte as 0/255.
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    save_image(&mask.to_image(), path)
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn next_uint(&mut self, what: &str) -> Result<u64> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format(format!("missing or non-numeric {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("{what} out of range")))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let binary = &bytes[..2] == b"P5";
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.next_uint("width")? as usize;
    let height = cur.next_uint("height")? as usize;
    let maxval = cur.next_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Format(format!("zero dimension {width}x{height}")));
    }
    if maxval != 255 {
        return Err(Error::UnsupportedDepth(format!(
            "PGM maxval {maxval} (only 255 is supported)"
        )));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;

    let pixels = if binary {
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(Error::Format("missing whitespace after maxval".into())),
        }
        let data = &bytes[cur.pos..];
        if data.len() < count {
            return Err(Error::Format(format!(
                "truncated raster: expected {count} bytes, found {}",
                data.len()
            )));
        }
        data[..count].to_vec()
    } else {
        let mut pixels = Vec::with_capacity(count);
        for i in 0..count {
            let v = cur
                .next_uint("pixel value")
                .map_err(|_| Error::Format(format!("missing or invalid pixel value #{i}")))?;
            if v > 255 {
                return Err(Error::Format(format!("pixel value {v} exceeds maxval 255")));
            }
            pixels.push(v as u8);
        }
        pixels
    };
    GrayImage::new(width, height, pixels)
}

/// Binary `P5` encoding.
pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.pixels());
    out
}

/// ASCII `P2` encoding, 16 values per line.
pub fn encode_pgm_ascii(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P2\n{} {}\n255\n", image.width(), image.height());
    for chunk in image.pixels().chunks(16) {
        let line: Vec<String> = chunk.iter().map(|p| p.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}

#[inline]
fn luma(r: u8, g: u8, b: u8) -> u8 {
    // integer form of round(0.299 R + 0.587 G + 0.114 B)
    ((299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b) + 500) / 1000) as u8
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let decoded = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| Error::Format(format!("PNG decode failed: {e}")))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let pixels = match decoded {
        DynamicImage::ImageLuma8(img) => img.into_raw(),
        DynamicImage::ImageLumaA8(img) => img.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageRgb8(img) => img.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        DynamicImage::ImageRgba8(img) => img.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        other => {
            return Err(Error::UnsupportedDepth(format!(
                "PNG color type {:?} (only 8-bit channels are supported)",
                other.color()
            )))
        }
    };
    GrayImage::new(w, h, pixels)
}

/// 8-bit grayscale PNG encoding.
pub fn encode_png(image: &GrayImage) -> Result<Vec<u8>> {
    let buf = image::GrayImage::from_raw(image.width() as u32, image.height() as u32, image.pixels().to_vec())
        .expect("buffer length matches dimensions");
    let mut out = std::io::Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Format(format!("PNG encode failed: {e}")))?;
    Ok(out.into_inner())
}
