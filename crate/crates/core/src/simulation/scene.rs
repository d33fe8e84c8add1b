use nalgebra::{Matrix3, Vector2, Vector3};
use rayon::prelude::*;

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::imageproc::GrayImage;

/// World-to-camera transform: `X_cam = R X_world + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraPose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl CameraPose {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let ortho = (rotation.transpose() * rotation - Matrix3::identity())
            .abs()
            .max();
        if ortho > 1e-9 || (rotation.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "pose rotation must be a proper rotation matrix",
            ));
        }
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("pose translation must be finite"));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Camera at `center` looking along world +z, axes aligned with the
    /// world axes.
    pub fn fronto_parallel(center: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: -center,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn center(&self) -> Vector3<f64> {
        -(self.rotation.transpose() * self.translation)
    }

    pub fn to_camera(&self, world: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * world + self.translation
    }
}

/// `n` fronto-parallel poses starting at `start`, each moved by `step`.
pub fn linear_trajectory(start: Vector3<f64>, step: Vector3<f64>, n: usize) -> Vec<CameraPose> {
    (0..n)
        .map(|k| CameraPose::fronto_parallel(start + step * k as f64))
        .collect()
}

/// Gray texture on the world plane `z = 0`, centred on the origin, with
/// `texel_size` world units per texel.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneTexture {
    image: GrayImage,
    texel_size: f64,
}

impl PlaneTexture {
    pub fn new(image: GrayImage, texel_size: f64) -> Result<Self> {
        if !(texel_size > 0.0 && texel_size.is_finite()) {
            return Err(Error::invalid("texel size must be positive"));
        }
        Ok(Self { image, texel_size })
    }

    pub fn image(&self) -> &GrayImage {
        &self.image
    }

    pub fn texel_size(&self) -> f64 {
        self.texel_size
    }

    fn half_extent(&self) -> Vector2<f64> {
        Vector2::new(
            (self.image.width() - 1) as f64 / 2.0,
            (self.image.height() - 1) as f64 / 2.0,
        )
    }

    pub fn world_to_texel(&self, p: Vector2<f64>) -> Vector2<f64> {
        p / self.texel_size + self.half_extent()
    }

    pub fn texel_to_world(&self, t: Vector2<f64>) -> Vector2<f64> {
        (t - self.half_extent()) * self.texel_size
    }

    /// Bilinear intensity at a world position, `None` off the texture.
    pub fn sample(&self, p: Vector2<f64>) -> Option<f64> {
        let t = self.world_to_texel(p);
        self.image.sample_bilinear(t.x, t.y).ok()
    }
}

/// Calibrated camera moving over a textured plane.
#[derive(Clone, Debug)]
pub struct SimSequence {
    pub model: CameraModel,
    pub texture: PlaneTexture,
    pub poses: Vec<CameraPose>,
    /// Samples per pixel along each axis; 1 renders one ray per pixel.
    pub supersample: usize,
}

impl SimSequence {
    pub fn new(model: CameraModel, texture: PlaneTexture, poses: Vec<CameraPose>) -> Result<Self> {
        if poses.is_empty() {
            return Err(Error::invalid("sequence needs at least one pose"));
        }
        for (k, p) in poses.iter().enumerate() {
            if p.center().z.abs() < 1e-12 {
                return Err(Error::invalid(format!(
                    "pose {k}: camera lies in the textured plane"
                )));
            }
        }
        Ok(Self {
            model,
            texture,
            poses,
            supersample: 1,
        })
    }

    pub fn with_supersample(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("supersampling factor must be at least 1"));
        }
        self.supersample = n;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    /// Intensity seen along camera-frame `ray`; 0 when the ray misses the
    /// plane or the texture.
    fn shade(&self, pose: &CameraPose, center: &Vector3<f64>, ray: &Vector3<f64>) -> f64 {
        let dir = pose.rotation.transpose() * ray;
        if dir.z == 0.0 {
            return 0.0;
        }
        let s = -center.z / dir.z;
        if !(s > 0.0) {
            return 0.0;
        }
        let hit = center + dir * s;
        self.texture
            .sample(Vector2::new(hit.x, hit.y))
            .unwrap_or(0.0)
    }

    /// Sub-pixel rays of image row `y`, `supersample^2` per pixel. Pixels the
    /// model cannot unproject get `None`.
    fn row_rays(&self, y: usize) -> Vec<Option<Vector3<f64>>> {
        let n = self.supersample;
        let offsets: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64 - 0.5).collect();
        let mut rays = Vec::with_capacity(self.model.width() * n * n);
        for x in 0..self.model.width() {
            for dy in &offsets {
                for dx in &offsets {
                    rays.push(
                        self.model
                            .ray(Vector2::new(x as f64 + dx, y as f64 + dy))
                            .ok(),
                    );
                }
            }
        }
        rays
    }

    fn render_row(&self, pose: &CameraPose, rays: &[Option<Vector3<f64>>]) -> Vec<u8> {
        let center = pose.center();
        let per_pixel = self.supersample * self.supersample;
        rays.chunks(per_pixel)
            .map(|px| {
                let acc: f64 = px
                    .iter()
                    .flatten()
                    .map(|r| self.shade(pose, &center, r))
                    .sum();
                (acc / per_pixel as f64).round().clamp(0.0, 255.0) as u8
            })
            .collect()
    }

    fn render_poses(&self, poses: &[CameraPose]) -> Vec<GrayImage> {
        let (w, h) = (self.model.width(), self.model.height());
        let rows: Vec<Vec<Vec<u8>>> = (0..h)
            .into_par_iter()
            .map(|y| {
                let rays = self.row_rays(y);
                poses
                    .iter()
                    .map(|pose| self.render_row(pose, &rays))
                    .collect()
            })
            .collect();
        (0..poses.len())
            .map(|k| {
                let data = rows.iter().flat_map(|r| r[k].iter().copied()).collect();
                GrayImage::new(w, h, data).expect("row lengths match the model size")
            })
            .collect()
    }

    /// Inverse-mapping render of view `index`; rows in parallel.
    pub fn render_view(&self, index: usize) -> Result<GrayImage> {
        let pose = self.poses.get(index).ok_or_else(|| {
            Error::invalid(format!(
                "view {index} out of range ({} views)",
                self.poses.len()
            ))
        })?;
        Ok(self.render_poses(std::slice::from_ref(pose)).remove(0))
    }

    /// Renders every view, unprojecting each sub-pixel ray only once.
    pub fn render_all(&self) -> Result<Vec<GrayImage>> {
        Ok(self.render_poses(&self.poses))
    }

    /// Pixel position of a plane point in one view, `None` if it is behind
    /// the camera or outside the image.
    pub fn project_point(&self, view: usize, point: Vector2<f64>) -> Option<Vector2<f64>> {
        let pc = self
            .poses
            .get(view)?
            .to_camera(&Vector3::new(point.x, point.y, 0.0));
        let px = self.model.project(&pc).ok()?;
        self.model.contains(&px).then_some(px)
    }

    /// `tracks[view][point]`.
    pub fn track_points(&self, points: &[Vector2<f64>]) -> Vec<Vec<Option<Vector2<f64>>>> {
        (0..self.len())
            .map(|v| points.iter().map(|&p| self.project_point(v, p)).collect())
            .collect()
    }

    /// Plane point seen at `pixel` in view `view`.
    pub fn backproject(&self, view: usize, pixel: Vector2<f64>) -> Option<Vector2<f64>> {
        let pose = self.poses.get(view)?;
        let ray = self.model.unproject(pixel).ok()?;
        let dir = pose.rotation.transpose() * ray.as_vector();
        let center = pose.center();
        let s = -center.z / dir.z;
        (s > 0.0 && s.is_finite()).then(|| {
            let hit = center + dir * s;
            Vector2::new(hit.x, hit.y)
        })
    }
}
