//! Grayscale raster, smoothing, sub-pixel sampling and image pyramids.

mod filter;
mod pgm;
mod pyramid;

pub use filter::{gaussian_kernel, gaussian_smooth};
pub use pgm::{decode_pgm, encode_pgm, read_pgm, write_pgm};
pub use pyramid::{build_pyramid, Pyramid, MIN_LEVEL_SIZE};

use crate::error::{Error, Result};

/// Single-channel 8-bit image stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(data.len(), width * height));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Image filled with a single intensity.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    /// Intensity-inverted copy (255 - I).
    pub fn inverted(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| 255 - v).collect(),
        }
    }

    /// Copy of the `w`x`h` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Self> {
        if x0 + w > self.width || y0 + h > self.height {
            return Err(Error::invalid(format!(
                "crop {w}x{h}+{x0}+{y0} exceeds image {}x{}",
                self.width, self.height
            )));
        }
        Self::from_fn(w, h, |x, y| self.get(x0 + x, y0 + y))
    }

    /// Bilinear interpolation at a sub-pixel position.
    ///
    /// The position must lie in `[0, width-1] x [0, height-1]`.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Result<f64> {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        if !(0.0..=max_x).contains(&x) || !(0.0..=max_y).contains(&y) {
            return Err(Error::OutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.sample_unchecked(x, y))
    }

    /// Bilinear interpolation after clamping the position onto the image.
    #[inline]
    pub fn sample_clamped(&self, x: f64, y: f64) -> f64 {
        let x = x.clamp(0.0, (self.width - 1) as f64);
        let y = y.clamp(0.0, (self.height - 1) as f64);
        self.sample_unchecked(x, y)
    }

    #[inline]
    fn sample_unchecked(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);

        let row0 = y0 * self.width;
        let row1 = y1 * self.width;
        let p00 = self.data[row0 + x0] as f64;
        let p10 = self.data[row0 + x1] as f64;
        let p01 = self.data[row1 + x0] as f64;
        let p11 = self.data[row1 + x1] as f64;

        let top = p00 + fx * (p10 - p00);
        let bottom = p01 + fx * (p11 - p01);
        top + fy * (bottom - top)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> GrayImage {
        GrayImage::from_fn(10, 10, |x, y| (x * 10 + y) as u8).unwrap()
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(GrayImage::new(3, 3, vec![0; 8]).is_err());
        assert!(GrayImage::new(0, 3, vec![]).is_err());
    }

    #[test]
    fn integer_lattice_is_exact() {
        let img = ramp();
        assert_eq!(img.sample_bilinear(3.0, 7.0).unwrap(), img.get(3, 7) as f64);
        assert_eq!(img.sample_bilinear(9.0, 9.0).unwrap(), img.get(9, 9) as f64);
        for y in 0..10 {
            for x in 0..10 {
                assert_eq!(
                    img.sample_bilinear(x as f64, y as f64).unwrap(),
                    img.get(x, y) as f64
                );
            }
        }
    }

    #[test]
    fn midpoint_and_quarter_blend() {
        let img = GrayImage::new(2, 1, vec![0, 100]).unwrap();
        assert_eq!(img.sample_bilinear(0.5, 0.0).unwrap(), 50.0);

        let img = GrayImage::new(2, 1, vec![40, 80]).unwrap();
        // 0.75 * 40 + 0.25 * 80
        assert_eq!(img.sample_bilinear(0.25, 0.0).unwrap(), 50.0);
    }

    #[test]
    fn out_of_range_rejected() {
        let img = ramp();
        assert!(img.sample_bilinear(-0.01, 0.0).is_err());
        assert!(img.sample_bilinear(0.0, 9.001).is_err());
        assert!(img.sample_bilinear(f64::NAN, 0.0).is_err());
        assert_eq!(img.sample_clamped(-5.0, 20.0), img.get(0, 9) as f64);
    }
}
