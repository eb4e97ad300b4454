//! Subimage generation.
//!
//! Authentic-distortion images yield a few large square crops anchored
//! across the long axis (plus mirrors), resampled to a common side.
//! Synthetic-distortion images are tiled into small patches and the tiles
//! with the most high-frequency DCT energy are kept.

use alloc::vec::Vec;

use crate::dct::{read_block, Dct8, BLOCK};
use crate::error::{Error, Result};
use crate::image::{Plane, YuvImage};
use crate::manifest::Scenario;

/// Subimage sides must be multiples of this so both hops tile exactly.
pub const SIDE_QUANTUM: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AugmentConfig {
    pub scenario: Scenario,
    pub patch_size: usize,
    pub patch_count: usize,
    /// Positional crops across the long axis (before mirroring).
    pub crop_count: usize,
    pub use_flips: bool,
    pub target_side: usize,
}

impl AugmentConfig {
    pub fn synthetic() -> Self {
        Self {
            scenario: Scenario::Synthetic,
            patch_size: 96,
            patch_count: 25,
            crop_count: 3,
            use_flips: true,
            target_side: 384,
        }
    }

    pub fn authentic() -> Self {
        Self {
            scenario: Scenario::Authentic,
            ..Self::synthetic()
        }
    }

    pub fn for_scenario(scenario: Scenario) -> Self {
        match scenario {
            Scenario::Synthetic => Self::synthetic(),
            Scenario::Authentic => Self::authentic(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        match self.scenario {
            Scenario::Synthetic => {
                if self.patch_size == 0 || !self.patch_size.is_multiple_of(SIDE_QUANTUM) {
                    return bad("patch_size must be a positive multiple of 24");
                }
                if self.patch_count == 0 {
                    return bad("patch_count must be positive");
                }
            }
            Scenario::Authentic => {
                if self.target_side == 0 || !self.target_side.is_multiple_of(SIDE_QUANTUM) {
                    return bad("target_side must be a positive multiple of 24");
                }
                if self.crop_count == 0 {
                    return bad("crop_count must be positive");
                }
            }
        }
        Ok(())
    }

    /// Number of subimages produced per image (synthetic: an upper bound).
    pub fn subimages_per_image(&self) -> usize {
        match self.scenario {
            Scenario::Synthetic => self.patch_count,
            Scenario::Authentic => self.crop_count * if self.use_flips { 2 } else { 1 },
        }
    }

    /// Side of every produced subimage.
    pub fn subimage_side(&self) -> usize {
        match self.scenario {
            Scenario::Synthetic => self.patch_size,
            Scenario::Authentic => self.target_side,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subimage {
    pub pixels: YuvImage,
    pub source_index: usize,
    pub mos: f64,
    pub flip: bool,
}

/// Dispatches on the configured scenario.
pub fn augment(img: &YuvImage, source_index: usize, mos: f64, cfg: &AugmentConfig) -> Result<Vec<Subimage>> {
    match cfg.scenario {
        Scenario::Authentic => crop_authentic(img, source_index, mos, cfg),
        Scenario::Synthetic => crop_synthetic(img, source_index, mos, cfg),
    }
}

/// Top-left corners and side of the positional crops. Landscape images are
/// cropped left to right, portrait images top to bottom.
pub fn crop_anchors(width: usize, height: usize, count: usize) -> (usize, Vec<(usize, usize)>) {
    let side = width.min(height);
    let slack = width.max(height) - side;
    let offsets: Vec<usize> = if count == 1 {
        alloc::vec![slack / 2]
    } else {
        (0..count).map(|k| k * slack / (count - 1)).collect()
    };
    let anchors = offsets
        .into_iter()
        .map(|o| if width >= height { (o, 0) } else { (0, o) })
        .collect();
    (side, anchors)
}

pub fn crop_authentic(
    img: &YuvImage,
    source_index: usize,
    mos: f64,
    cfg: &AugmentConfig,
) -> Result<Vec<Subimage>> {
    cfg.validate()?;
    let (w, h) = (img.width(), img.height());
    if w.min(h) < BLOCK {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            required: BLOCK,
        });
    }
    let (side, anchors) = crop_anchors(w, h, cfg.crop_count);
    let base: Vec<YuvImage> = anchors
        .iter()
        .map(|&(x, y)| img.crop(x, y, side, side))
        .collect();
    let mut out = Vec::with_capacity(cfg.subimages_per_image());
    let t = cfg.target_side;
    for crop in &base {
        out.push(Subimage {
            pixels: crop.resize_bilinear(t, t),
            source_index,
            mos,
            flip: false,
        });
    }
    if cfg.use_flips {
        for crop in &base {
            out.push(Subimage {
                pixels: crop.mirror_horizontal().resize_bilinear(t, t),
                source_index,
                mos,
                flip: true,
            });
        }
    }
    Ok(out)
}

/// Sum of absolute AC coefficients over the 8×8 blocks of a square window.
pub fn high_frequency_score(plane: &Plane, left: usize, top: usize, size: usize, dct: &Dct8) -> f64 {
    let mut score = 0.0;
    for br in (top..top + size).step_by(BLOCK) {
        for bc in (left..left + size).step_by(BLOCK) {
            let coeffs = dct.forward(&read_block(plane, br, bc));
            for (k, row) in coeffs.iter().enumerate() {
                for (l, &c) in row.iter().enumerate() {
                    if k + l > 0 {
                        score += libm::fabs(c);
                    }
                }
            }
        }
    }
    score
}

/// Candidate tile origins in row-major order.
pub fn tile_origins(width: usize, height: usize, patch: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 0..height / patch {
        for c in 0..width / patch {
            out.push((c * patch, r * patch));
        }
    }
    out
}

pub fn crop_synthetic(
    img: &YuvImage,
    source_index: usize,
    mos: f64,
    cfg: &AugmentConfig,
) -> Result<Vec<Subimage>> {
    cfg.validate()?;
    let p = cfg.patch_size;
    if img.width() < p || img.height() < p {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            required: p,
        });
    }
    let dct = Dct8::new();
    let tiles = tile_origins(img.width(), img.height(), p);
    let mut scored: Vec<(f64, usize)> = tiles
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| (high_frequency_score(&img.y, x, y, p, &dct), i))
        .collect();
    // descending score, raster order on ties
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(scored
        .into_iter()
        .take(cfg.patch_count)
        .map(|(_, i)| {
            let (x, y) = tiles[i];
            Subimage {
                pixels: img.crop(x, y, p, p),
                source_index,
                mos,
                flip: false,
            }
        })
        .collect())
}
