use std::fs;
use std::path::Path;

use nalgebra::{Matrix3, Vector2, Vector3};

use crate::camera::CameraModel;
use crate::detector::Keypoint;
use crate::error::{Error, Result};

/// Plane-to-plane map between undistorted normalized image planes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homography(Matrix3<f64>);

impl Homography {
    /// Scaled so the bottom-right entry is 1 when it is nonzero.
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("homography has non-finite entries"));
        }
        if m.determinant().abs() <= 1e-12 {
            return Err(Error::invalid("homography is singular"));
        }
        let m = if m[(2, 2)] != 0.0 { m / m[(2, 2)] } else { m };
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self(Matrix3::new(1.0, 0.0, tx, 0.0, 1.0, ty, 0.0, 0.0, 1.0))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// `a` then `self`.
    pub fn after(&self, a: &Homography) -> Result<Homography> {
        Homography::new(self.0 * a.0)
    }

    /// Homogeneous image of a normalized-plane point.
    pub fn apply(&self, m: Vector2<f64>) -> Vector3<f64> {
        self.0 * Vector3::new(m.x, m.y, 1.0)
    }
}

/// Nine whitespace-separated reals, row-major.
pub fn parse_homography(text: &str) -> Result<Homography> {
    let v: Vec<f64> = text
        .split_whitespace()
        .map(|s| s.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::parse("homography", e.to_string()))?;
    if v.len() != 9 {
        return Err(Error::parse(
            "homography",
            format!("expected 9 numbers, found {}", v.len()),
        ));
    }
    Homography::new(Matrix3::from_row_slice(&v))
        .map_err(|e| Error::parse("homography", e.to_string()))
}

pub fn format_homography(h: &Homography) -> String {
    let m = h.matrix();
    (0..3)
        .map(|r| format!("{} {} {}\n", m[(r, 0)], m[(r, 1)], m[(r, 2)]))
        .collect()
}

pub fn read_homography(path: impl AsRef<Path>) -> Result<Homography> {
    let path = path.as_ref();
    parse_homography(&fs::read_to_string(path)?).map_err(|e| match e {
        Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
        other => other,
    })
}

/// Maps keypoints of one image into another: unproject onto the normalized
/// plane, apply `h`, project with the same model. `None` marks points that
/// cannot be unprojected, land behind the camera, or leave the image.
pub fn project_keypoints(
    kps: &[Keypoint],
    model: &CameraModel,
    h: &Homography,
) -> Vec<Option<Vector2<f64>>> {
    kps.iter()
        .map(|kp| {
            let v = model.unproject(Vector2::new(kp.x, kp.y)).ok()?;
            if v.z() <= 0.0 {
                return None;
            }
            let w = h.apply(Vector2::new(v.x() / v.z(), v.y() / v.z()));
            if w.z <= 0.0 {
                return None;
            }
            let px = model.project(&w).ok()?;
            model.contains(&px).then_some(px)
        })
        .collect()
}
