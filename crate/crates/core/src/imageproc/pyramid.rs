use super::GrayImage;
use crate::error::{Error, Result};

/// Smallest admissible side length of a pyramid level.
pub const MIN_LEVEL_SIZE: usize = 16;

/// Multi-resolution stack; level `k` is the base image downscaled by
/// `scale_factor^k`.
#[derive(Clone, Debug)]
pub struct Pyramid {
    pub levels: Vec<GrayImage>,
    pub scale_factor: f64,
}

impl Pyramid {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Ratio between level-0 and level-`octave` pixel units.
    pub fn scale(&self, octave: usize) -> f64 {
        self.scale_factor.powi(octave as i32)
    }
}

pub fn build_pyramid(img: &GrayImage, n_levels: usize, scale_factor: f64) -> Result<Pyramid> {
    if n_levels == 0 {
        return Err(Error::invalid("pyramid needs at least one level"));
    }
    if !(scale_factor > 1.0) || !scale_factor.is_finite() {
        return Err(Error::invalid(format!(
            "pyramid scale factor must exceed 1, got {scale_factor}"
        )));
    }
    if img.width() < MIN_LEVEL_SIZE || img.height() < MIN_LEVEL_SIZE {
        return Err(Error::invalid(format!(
            "image {}x{} smaller than {MIN_LEVEL_SIZE}x{MIN_LEVEL_SIZE}",
            img.width(),
            img.height()
        )));
    }

    let mut levels = Vec::with_capacity(n_levels);
    levels.push(img.clone());
    for k in 1..n_levels {
        let s = scale_factor.powi(k as i32);
        let w = (img.width() as f64 / s).floor() as usize;
        let h = (img.height() as f64 / s).floor() as usize;
        if w < MIN_LEVEL_SIZE || h < MIN_LEVEL_SIZE {
            return Err(Error::invalid(format!(
                "pyramid level {k} would be {w}x{h}, below {MIN_LEVEL_SIZE}x{MIN_LEVEL_SIZE}"
            )));
        }
        let prev: &GrayImage = &levels[k - 1];
        let next = GrayImage::from_fn(w, h, |x, y| {
            prev.sample_clamped(x as f64 * scale_factor, y as f64 * scale_factor)
                .round() as u8
        })?;
        levels.push(next);
    }
    Ok(Pyramid {
        levels,
        scale_factor,
    })
}
