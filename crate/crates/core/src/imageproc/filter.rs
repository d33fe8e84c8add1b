use super::GrayImage;
use crate::error::{Error, Result};

/// Normalized 1-D Gaussian kernel with radius `ceil(3 * sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!(
            "smoothing sigma must be positive, got {sigma}"
        )));
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let denom = 2.0 * sigma * sigma;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / denom).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= sum);
    Ok(kernel)
}

/// Separable Gaussian blur with clamp-to-edge borders.
///
/// Both passes accumulate in `f64`; the result is rounded once to the nearest
/// integer intensity.
pub fn gaussian_smooth(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    let kernel = gaussian_kernel(sigma)?;
    let radius = (kernel.len() / 2) as isize;
    let (w, h) = (img.width(), img.height());
    let src = img.data();

    let mut horizontal = vec![0.0f64; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        let out = &mut horizontal[y * w..(y + 1) * w];
        for (x, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                let sx = (x as isize + k as isize - radius).clamp(0, w as isize - 1) as usize;
                acc += kv * row[sx] as f64;
            }
            *o = acc;
        }
    }

    let mut data = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                let sy = (y as isize + k as isize - radius).clamp(0, h as isize - 1) as usize;
                acc += kv * horizontal[sy * w + x];
            }
            data[y * w + x] = acc.round().clamp(0.0, 255.0) as u8;
        }
    }
    GrayImage::new(w, h, data)
}
