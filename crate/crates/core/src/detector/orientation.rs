use std::f64::consts::PI;

use super::Keypoint;
use crate::imageproc::GrayImage;

/// Intensity-centroid orientation over a disc of `radius` pixels centred on
/// the (rounded) keypoint position. Pixels outside the image are read with
/// clamp-to-edge. A patch whose first moments both vanish gets angle 0.
pub fn orientation_centroid(img: &GrayImage, kp: &Keypoint, radius: usize) -> f64 {
    let cx = kp.x.round() as i64;
    let cy = kp.y.round() as i64;
    let r = radius as i64;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut m10: i64 = 0;
    let mut m01: i64 = 0;
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy > r * r {
                continue;
            }
            let x = (cx + dx).clamp(0, w - 1) as usize;
            let y = (cy + dy).clamp(0, h - 1) as usize;
            let v = img.get(x, y) as i64;
            m10 += dx * v;
            m01 += dy * v;
        }
    }
    if m10 == 0 && m01 == 0 {
        return 0.0;
    }
    normalize_angle((m01 as f64).atan2(m10 as f64))
}

/// Wraps an angle into `[-pi, pi)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let a = (angle + PI).rem_euclid(2.0 * PI) - PI;
    if a >= PI {
        -PI
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(phi: f64) -> GrayImage {
        let (c, s) = (phi.cos(), phi.sin());
        GrayImage::from_fn(41, 41, |x, y| {
            let (dx, dy) = (x as f64 - 20.0, y as f64 - 20.0);
            (128.0 + 5.0 * (dx * c + dy * s)).round().clamp(0.0, 255.0) as u8
        })
        .unwrap()
    }

    fn at_center() -> Keypoint {
        Keypoint {
            x: 20.0,
            y: 20.0,
            angle: 0.0,
            octave: 0,
            score: 0.0,
        }
    }

    #[test]
    fn rightward_ramp_points_along_x() {
        let img = GrayImage::from_fn(41, 41, |x, _| (x * 5) as u8).unwrap();
        assert!(orientation_centroid(&img, &at_center(), 15).abs() < 1e-6);
    }

    #[test]
    fn rotated_ramp_points_down() {
        let img = GrayImage::from_fn(41, 41, |_, y| (y * 5) as u8).unwrap();
        assert!((orientation_centroid(&img, &at_center(), 15) - PI / 2.0).abs() < 0.05);
    }

    #[test]
    fn constant_patch_has_zero_angle() {
        let img = GrayImage::filled(41, 41, 77).unwrap();
        assert_eq!(orientation_centroid(&img, &at_center(), 15), 0.0);
    }

    #[test]
    fn follows_ramp_rotation() {
        let base = orientation_centroid(&ramp(0.0), &at_center(), 15);
        for k in -11..12 {
            let phi = k as f64 * 0.27;
            let angle = orientation_centroid(&ramp(phi), &at_center(), 15);
            let diff = normalize_angle(angle - base - phi);
            assert!(diff.abs() < 0.05, "phi {phi}: got {angle}");
        }
    }

    #[test]
    fn angle_wrapping() {
        assert_eq!(normalize_angle(PI), -PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(normalize_angle(0.5), 0.5);
    }
}
