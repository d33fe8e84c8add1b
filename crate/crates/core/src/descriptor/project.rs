use nalgebra::{Vector2, Vector3};

use super::bits::BinaryDescriptor;
use super::testset::{rotate, TestSet};
use crate::camera::{CameraKind, CameraModel};
use crate::detector::Keypoint;
use crate::error::{Error, Result};
use crate::imageproc::GrayImage;

/// Bearings this close to the image plane cannot anchor a test pattern.
const MIN_BEARING_Z: f64 = 1e-6;

/// Test endpoints in absolute (sub-pixel) image coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedTestSet {
    pub pairs: Vec<[Vector2<f64>; 2]>,
    pub keypoint: Keypoint,
    /// Endpoints that fell outside the image and were moved onto the border.
    pub clamped: usize,
}

/// Maps a test set into the image around `kp` through the camera model.
///
/// The keypoint is unprojected to its bearing, moved onto the normalized
/// plane and scaled onto the plane at distance `lambda`. The tests, rotated
/// by `angle` and scaled by `scale_factor^octave`, are added there and each
/// endpoint is projected back with the model. For a pinhole model this is
/// plain anchoring at the keypoint.
pub fn project_tests(
    q: &TestSet,
    kp: &Keypoint,
    model: &CameraModel,
    angle: f64,
    scale_factor: f64,
) -> Result<ProjectedTestSet> {
    let endpoints = q.pairs().iter().flat_map(|p| [p.a, p.b]);
    let (points, clamped) = project_offsets(endpoints, kp, model, angle, scale_factor)?;
    Ok(ProjectedTestSet {
        pairs: points.chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
        keypoint: *kp,
        clamped,
    })
}

/// Projects individual patch offsets the same way `project_tests` projects
/// test endpoints. Returns the clamped image points and the clamp count.
pub(crate) fn project_offsets(
    offsets: impl IntoIterator<Item = Vector2<f64>>,
    kp: &Keypoint,
    model: &CameraModel,
    angle: f64,
    scale_factor: f64,
) -> Result<(Vec<Vector2<f64>>, usize)> {
    let scale = scale_factor.powi(kp.octave as i32);
    let (sin, cos) = angle.sin_cos();
    let keypoint_px = Vector2::new(kp.x, kp.y);
    let (max_x, max_y) = ((model.width() - 1) as f64, (model.height() - 1) as f64);

    let mut clamped = 0usize;
    let mut clamp = |p: Vector2<f64>| {
        let c = Vector2::new(p.x.clamp(0.0, max_x), p.y.clamp(0.0, max_y));
        if c != p {
            clamped += 1;
        }
        c
    };

    let points = match model.kind() {
        CameraKind::Pinhole => {
            if !model.contains(&keypoint_px) {
                return Err(Error::ModelDomain(format!(
                    "keypoint ({}, {}) outside image",
                    kp.x, kp.y
                )));
            }
            offsets
                .into_iter()
                .map(|o| clamp(keypoint_px + rotate(o, cos, sin) * scale))
                .collect()
        }
        _ => {
            let v = model.unproject(keypoint_px)?;
            if v.z() <= MIN_BEARING_Z {
                return Err(Error::ModelDomain(format!(
                    "keypoint ({}, {}) too close to the image-plane horizon (v_z = {})",
                    kp.x,
                    kp.y,
                    v.z()
                )));
            }
            let lambda = model.lambda();
            let anchor = Vector2::new(v.x() / v.z(), v.y() / v.z()) * lambda;
            let mut points = Vec::new();
            for o in offsets {
                let e = anchor + rotate(o, cos, sin) * scale;
                points.push(clamp(model.project(&Vector3::new(e.x, e.y, lambda))?));
            }
            points
        }
    };
    Ok((points, clamped))
}

/// Evaluates every test on a smoothed image: bit `d` is set iff
/// `I(a_d) < I(b_d)` under bilinear sampling (ties give 0).
pub fn apply_tests(img: &GrayImage, pts: &ProjectedTestSet) -> BinaryDescriptor {
    let mut desc = BinaryDescriptor::zeros(pts.pairs.len());
    for (d, [a, b]) in pts.pairs.iter().enumerate() {
        if img.sample_clamped(a.x, a.y) < img.sample_clamped(b.x, b.y) {
            desc.set_bit(d, true);
        }
    }
    desc
}
