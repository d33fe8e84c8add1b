//! Oriented corner detection: FAST segment test on every pyramid level,
//! intensity-centroid orientation, and a deterministic global top-N merge.
//!
//! Detection runs on the raw (possibly distorted) image; the circle is not
//! adapted to the lens.

mod fast;
mod orientation;

pub use fast::{detect_fast, CIRCLE};
pub use orientation::{normalize_angle, orientation_centroid};

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imageproc::Pyramid;

/// Oriented keypoint; `(x, y)` are level-0 pixel coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    /// Radians in `[-pi, pi)`, y axis pointing down.
    pub angle: f64,
    pub octave: u32,
    pub score: f64,
}

impl Keypoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            angle: 0.0,
            octave: 0,
            score: 0.0,
        }
    }

    /// True if the keypoint is at least `patch_radius * scale_factor^octave`
    /// pixels away from every border of a `width` x `height` image.
    pub fn has_margin(
        &self,
        width: usize,
        height: usize,
        patch_radius: f64,
        scale_factor: f64,
    ) -> bool {
        let m = patch_radius * scale_factor.powi(self.octave as i32);
        self.x >= m
            && self.y >= m
            && self.x <= width as f64 - 1.0 - m
            && self.y <= height as f64 - 1.0 - m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorConfig {
    pub n_target: usize,
    pub threshold: u8,
    pub n_contiguous: usize,
    pub orientation_radius: usize,
    /// Descriptor patch radius used for the border margin.
    pub patch_radius: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            n_target: 500,
            threshold: 20,
            n_contiguous: 9,
            orientation_radius: 15,
            patch_radius: 16.0,
        }
    }
}

/// FAST on every level, orientation at the native level, then the
/// `n_target` strongest keypoints overall.
///
/// Ordering is by score (descending) with ties broken by octave, then y,
/// then x (all ascending), so the result does not depend on thread schedule.
pub fn detect_multiscale(pyr: &Pyramid, cfg: &DetectorConfig) -> Result<Vec<Keypoint>> {
    if cfg.n_target == 0 {
        return Err(Error::invalid("n_target must be at least 1"));
    }
    let base = &pyr.levels[0];
    let (w0, h0) = (base.width(), base.height());

    let per_level: Vec<Vec<Keypoint>> = pyr
        .levels
        .par_iter()
        .enumerate()
        .map(|(octave, level)| -> Result<Vec<Keypoint>> {
            let scale = pyr.scale(octave);
            let r = cfg.orientation_radius as f64;
            let (wl, hl) = (level.width() as f64, level.height() as f64);
            let mut kps = detect_fast(level, cfg.threshold, cfg.n_contiguous)?;
            kps.retain_mut(|kp| {
                let fits_native =
                    kp.x >= r && kp.y >= r && kp.x <= wl - 1.0 - r && kp.y <= hl - 1.0 - r;
                if !fits_native {
                    return false;
                }
                kp.angle = orientation_centroid(level, kp, cfg.orientation_radius);
                kp.octave = octave as u32;
                kp.x *= scale;
                kp.y *= scale;
                kp.has_margin(w0, h0, cfg.patch_radius, pyr.scale_factor)
            });
            Ok(kps)
        })
        .collect::<Result<_>>()?;

    let mut all: Vec<Keypoint> = per_level.into_iter().flatten().collect();
    all.sort_by(compare_keypoints);
    all.truncate(cfg.n_target);
    Ok(all)
}

fn compare_keypoints(a: &Keypoint, b: &Keypoint) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.octave.cmp(&b.octave))
        .then(a.y.total_cmp(&b.y))
        .then(a.x.total_cmp(&b.x))
}

const KEYPOINT_HEADER: &str = "keypoints v1";

/// Text form: header line, then `x y angle octave score` per keypoint.
pub fn format_keypoints(kps: &[Keypoint]) -> String {
    let mut out = String::with_capacity(32 * (kps.len() + 1));
    out.push_str(KEYPOINT_HEADER);
    out.push('\n');
    for kp in kps {
        writeln!(
            out,
            "{} {} {} {} {}",
            kp.x, kp.y, kp.angle, kp.octave, kp.score
        )
        .unwrap();
    }
    out
}

pub fn parse_keypoints(text: &str) -> Result<Vec<Keypoint>> {
    let err = |line: usize, msg: &str| Error::parse("keypoints", format!("line {line}: {msg}"));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == KEYPOINT_HEADER => {}
        _ => return Err(err(1, "expected header `keypoints v1`")),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(err(i + 1, "expected `x y angle octave score`"));
        }
        let real = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
        let (Some(x), Some(y), Some(angle), Some(octave), Some(score)) = (
            real(fields[0]),
            real(fields[1]),
            real(fields[2]),
            fields[3].parse::<u32>().ok(),
            real(fields[4]),
        ) else {
            return Err(err(i + 1, "malformed number"));
        };
        out.push(Keypoint {
            x,
            y,
            angle,
            octave,
            score,
        });
    }
    Ok(out)
}

pub fn write_keypoints(path: impl AsRef<Path>, kps: &[Keypoint]) -> Result<()> {
    fs::write(path, format_keypoints(kps))?;
    Ok(())
}

pub fn read_keypoints(path: impl AsRef<Path>) -> Result<Vec<Keypoint>> {
    let path = path.as_ref();
    parse_keypoints(&fs::read_to_string(path)?).map_err(|e| match e {
        Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imageproc::{build_pyramid, GrayImage};

    fn textured(w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| {
            let blob = ((x / 9) * 7 + (y / 11) * 13) % 5;
            (40 + blob * 40 + (x * 3 + y * 5) % 7) as u8
        })
        .unwrap()
    }

    #[test]
    fn single_level_matches_fast() {
        let img = textured(96, 80);
        let pyr = build_pyramid(&img, 1, 1.2).unwrap();
        let cfg = DetectorConfig {
            n_target: 10_000,
            ..Default::default()
        };
        let kps = detect_multiscale(&pyr, &cfg).unwrap();
        let mut raw = detect_fast(&img, cfg.threshold, cfg.n_contiguous).unwrap();
        raw.retain(|kp| kp.has_margin(96, 80, 16.0, 1.2));
        assert_eq!(kps.len(), raw.len());
        assert!(!kps.is_empty());
        for kp in &kps {
            let r = raw.iter().find(|r| r.x == kp.x && r.y == kp.y).unwrap();
            assert_eq!(r.score, kp.score);
            assert_eq!(kp.angle, orientation_centroid(&img, kp, 15));
        }
    }

    #[test]
    fn multiscale_is_deterministic_and_bounded() {
        let img = textured(160, 120);
        let pyr = build_pyramid(&img, 3, 1.2).unwrap();
        let cfg = DetectorConfig {
            n_target: 40,
            ..Default::default()
        };
        let a = detect_multiscale(&pyr, &cfg).unwrap();
        let b = detect_multiscale(&pyr, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.len() <= 40);
        for kp in &a {
            assert!(kp.has_margin(160, 120, 16.0, 1.2));
            assert!(
                kp.angle.is_finite()
                    && kp.angle >= -std::f64::consts::PI
                    && kp.angle < std::f64::consts::PI
            );
        }
        for pair in a.windows(2) {
            assert_ne!(compare_keypoints(&pair[0], &pair[1]), Ordering::Greater);
        }
    }

    #[test]
    fn large_target_returns_everything() {
        let img = textured(96, 96);
        let pyr = build_pyramid(&img, 2, 1.5).unwrap();
        let many = detect_multiscale(
            &pyr,
            &DetectorConfig {
                n_target: 1_000_000,
                ..Default::default()
            },
        )
        .unwrap();
        let capped = detect_multiscale(
            &pyr,
            &DetectorConfig {
                n_target: many.len() + 5,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(many, capped);
    }

    #[test]
    fn keypoint_text_roundtrip() {
        let kps = vec![
            Keypoint {
                x: 12.5,
                y: 7.0,
                angle: -1.234567890123,
                octave: 2,
                score: 311.0,
            },
            Keypoint::new(0.1, 1e-3),
        ];
        let text = format_keypoints(&kps);
        assert!(text.starts_with("keypoints v1\n"));
        assert_eq!(parse_keypoints(&text).unwrap(), kps);
        assert_eq!(format_keypoints(&[]), "keypoints v1\n");
        assert!(parse_keypoints("keypoints v2\n").is_err());
        assert!(parse_keypoints("keypoints v1\n1 2 3\n").is_err());
        assert!(parse_keypoints("keypoints v1\n1 2 3 -1 5\n").is_err());
    }
}
