//! Local contrast enhancement for low-contrast grayscale images, such as
//! near-infrared palm-vein captures, together with a descriptor-matching
//! harness for measuring verification performance.
//!
//! The enhancement stretches each `n x n` tile with an integer gain
//! `floor(255 / (max - min))` ([`ilacs`]) and removes the resulting tile
//! seams by blending four half-offset tile layers with Gaussian weights
//! ([`lgot`]).
//!
//! ```
//! use ilacs::{enhance, BlendConfig, GrayImage};
//!
//! let img = GrayImage::from_fn(64, 64, |x, y| (100 + (x + y) % 40) as u8);
//! let out = enhance(&img, None, &BlendConfig::default()).unwrap();
//! assert_eq!(out.dimensions(), (64, 64));
//! ```

pub mod cli;
pub mod error;
pub mod ilacs;
pub mod image;
pub mod io;
pub mod lgot;
pub mod matching;
pub mod preprocess;

pub use error::{Error, Result};
pub use ilacs::{
    acs_tile, enhance_acs_tiles, enhance_ilacs_tiles, enhance_tiles, ilacs_tile, partition, tile_stats,
    StretchKernel, TileRect, TileStats,
};
pub use image::{BinaryMask, GrayImage};
pub use io::{load_image, load_mask, save_image, save_mask};
pub use lgot::{
    composite, effective_weight_sum, enhance, gaussian_weight, gaussian_weights, layer_specs, layer_tiles,
    layered_tiles, weight_field, AccumBuffers, BlendConfig, LayerId, LayerSpec, WeightField, WeightMask,
};
pub use preprocess::{downscale, downscale_mask, erode_mask, gaussian_blur, histogram, Histogram};
