use super::Keypoint;
use crate::error::{Error, Result};
use crate::imageproc::{GrayImage, MIN_LEVEL_SIZE};

/// Bresenham circle of radius 3, clockwise from the top.
pub const CIRCLE: [(i32, i32); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

const CIRCLE_RADIUS: usize = 3;

fn check_params(img: &GrayImage, threshold: u8, n_contiguous: usize) -> Result<()> {
    if threshold == 0 {
        return Err(Error::invalid("FAST threshold must be positive"));
    }
    if !(9..=12).contains(&n_contiguous) {
        return Err(Error::invalid(format!(
            "FAST arc length must be in [9, 12], got {n_contiguous}"
        )));
    }
    if img.width() < MIN_LEVEL_SIZE || img.height() < MIN_LEVEL_SIZE {
        return Err(Error::invalid(format!(
            "image {}x{} too small for corner detection",
            img.width(),
            img.height()
        )));
    }
    Ok(())
}

/// Segment-test score at `(x, y)`: the largest sum of absolute differences
/// over a contiguous arc of at least `n` pixels that are all brighter than
/// `center + t` or all darker than `center - t`. Zero when no arc qualifies.
pub(crate) fn segment_score(img: &GrayImage, x: usize, y: usize, threshold: u8, n: usize) -> u32 {
    let center = img.get(x, y) as i32;
    let t = threshold as i32;
    let mut diffs = [0i32; 16];
    let mut n_bright = 0;
    let mut n_dark = 0;
    for (d, &(dx, dy)) in diffs.iter_mut().zip(CIRCLE.iter()) {
        let v = img.get((x as i32 + dx) as usize, (y as i32 + dy) as usize) as i32;
        *d = v - center;
        if *d > t {
            n_bright += 1;
        } else if *d < -t {
            n_dark += 1;
        }
    }

    let mut best = 0u32;
    for (count, polarity) in [(n_bright, 1i32), (n_dark, -1i32)] {
        if count < n {
            continue;
        }
        let hit = |i: usize| diffs[i % 16] * polarity > t;
        if count == 16 {
            best = best.max(diffs.iter().map(|d| d.unsigned_abs()).sum());
            continue;
        }
        for start in 0..16 {
            if !hit(start) || hit(start + 15) {
                continue;
            }
            let mut len = 0;
            let mut sum = 0u32;
            while len < 16 && hit(start + len) {
                sum += diffs[(start + len) % 16].unsigned_abs();
                len += 1;
            }
            if len >= n {
                best = best.max(sum);
            }
        }
    }
    best
}

/// Raw segment-test response map (row-major, zero where the test fails or
/// the circle does not fit).
pub(crate) fn score_map(img: &GrayImage, threshold: u8, n_contiguous: usize) -> Vec<u32> {
    let (w, h) = (img.width(), img.height());
    let mut scores = vec![0u32; w * h];
    for y in CIRCLE_RADIUS..h - CIRCLE_RADIUS {
        for x in CIRCLE_RADIUS..w - CIRCLE_RADIUS {
            scores[y * w + x] = segment_score(img, x, y, threshold, n_contiguous);
        }
    }
    scores
}

/// FAST corners with SAD score and 3x3 non-maximum suppression.
///
/// Returned keypoints carry angle 0 and octave 0, in raster order.
pub fn detect_fast(img: &GrayImage, threshold: u8, n_contiguous: usize) -> Result<Vec<Keypoint>> {
    check_params(img, threshold, n_contiguous)?;
    let (w, h) = (img.width(), img.height());
    let scores = score_map(img, threshold, n_contiguous);

    let mut out = Vec::new();
    for y in CIRCLE_RADIUS..h - CIRCLE_RADIUS {
        for x in CIRCLE_RADIUS..w - CIRCLE_RADIUS {
            let s = scores[y * w + x];
            if s == 0 {
                continue;
            }
            let mut is_max = true;
            'nms: for dy in -1i32..=1 {
                for dx in -1i32..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let nx = (x as i32 + dx) as usize;
                    let ny = (y as i32 + dy) as usize;
                    let ns = scores[ny * w + nx];
                    // equal scores: the earlier pixel in raster order wins
                    let earlier = (dy, dx) < (0, 0);
                    if ns > s || (ns == s && earlier) {
                        is_max = false;
                        break 'nms;
                    }
                }
            }
            if is_max {
                out.push(Keypoint {
                    x: x as f64,
                    y: y as f64,
                    angle: 0.0,
                    octave: 0,
                    score: s as f64,
                });
            }
        }
    }
    Ok(out)
}
