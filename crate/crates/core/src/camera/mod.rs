//! Calibrated interior orientation: pinhole, pinhole with division-model
//! radial distortion, and a generic polynomial fisheye model.
//!
//! Pixel coordinates are `(u, v)` with `v` pointing down. For the pinhole
//! variants, sensor coordinates are `(pixel - principal_point) / lambda`; the
//! division model acts on sensor coordinates. The fisheye variant follows the
//! polynomial model: a pixel maps to the ray `(m'_x, m'_y, f(rho))` with
//! `m' = A^-1 (pixel - o)`, `rho = |m'|` and
//! `f(rho) = a0 + a2 rho^2 + a3 rho^3 + a4 rho^4`.

mod calib;
mod radial;

pub use calib::{parse_calibration, read_calibration, write_calibration};
pub use radial::{distort_radial, undistort_radial};

use nalgebra::{Matrix2, Vector2, Vector3};

use crate::error::{Error, Result};

const NEWTON_MAX_ITERS: usize = 20;
const NEWTON_TOL: f64 = 1e-10;

/// Unit-norm viewing direction in the camera frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BearingVector(Vector3<f64>);

impl BearingVector {
    pub fn new(direction: Vector3<f64>) -> Result<Self> {
        let n = direction.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ModelDomain("zero-length bearing direction".into()));
        }
        Ok(Self(direction / n))
    }

    #[inline]
    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.0.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.0.y
    }

    #[inline]
    pub fn z(&self) -> f64 {
        self.0.z
    }
}

/// Fisheye intrinsics of the polynomial model.
#[derive(Clone, Debug, PartialEq)]
pub struct FisheyeParams {
    /// `a0, a2, a3, a4`.
    pub unproj_poly: [f64; 4],
    /// Optional `rho(theta) = sum c_i theta^i`; Newton iteration on the
    /// unprojection polynomial is used when absent.
    pub forward_poly: Option<Vec<f64>>,
    pub stretch: Matrix2<f64>,
}

impl FisheyeParams {
    pub fn symmetric(unproj_poly: [f64; 4]) -> Self {
        Self {
            unproj_poly,
            forward_poly: None,
            stretch: Matrix2::identity(),
        }
    }

    #[inline]
    fn unproj(&self, rho: f64) -> f64 {
        let [a0, a2, a3, a4] = self.unproj_poly;
        let rho2 = rho * rho;
        a0 + rho2 * (a2 + rho * (a3 + rho * a4))
    }

    #[inline]
    fn unproj_derivative(&self, rho: f64) -> f64 {
        let [_, a2, a3, a4] = self.unproj_poly;
        rho * (2.0 * a2 + rho * (3.0 * a3 + rho * 4.0 * a4))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CameraKind {
    Pinhole,
    PinholeRadial { xi: f64 },
    GenericFisheye(FisheyeParams),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CameraModel {
    kind: CameraKind,
    lambda: f64,
    principal_point: Vector2<f64>,
    width: usize,
    height: usize,
    stretch_inv: Matrix2<f64>,
    /// Upper bound on the fisheye sensor radius used to clamp Newton seeds.
    max_rho: f64,
}

impl CameraModel {
    pub fn pinhole(
        lambda: f64,
        principal_point: Vector2<f64>,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        Self::build(CameraKind::Pinhole, lambda, principal_point, width, height)
    }

    pub fn pinhole_radial(
        lambda: f64,
        xi: f64,
        principal_point: Vector2<f64>,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        Self::build(
            CameraKind::PinholeRadial { xi },
            lambda,
            principal_point,
            width,
            height,
        )
    }

    /// Fisheye model; `lambda` is taken from `a0`.
    pub fn fisheye(
        params: FisheyeParams,
        principal_point: Vector2<f64>,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let a0 = params.unproj_poly[0];
        Self::build(
            CameraKind::GenericFisheye(params),
            a0,
            principal_point,
            width,
            height,
        )
    }

    fn build(
        kind: CameraKind,
        lambda: f64,
        principal_point: Vector2<f64>,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("camera image size must be positive"));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::invalid(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if !principal_point.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("principal point must be finite"));
        }
        let mut model = Self {
            kind,
            lambda,
            principal_point,
            width,
            height,
            stretch_inv: Matrix2::identity(),
            max_rho: 0.0,
        };
        match &model.kind {
            CameraKind::Pinhole => {}
            CameraKind::PinholeRadial { xi } => {
                let xi = *xi;
                if !xi.is_finite() {
                    return Err(Error::invalid("xi must be finite"));
                }
                for corner in model.corners() {
                    let m_d = (corner - principal_point) / lambda;
                    let m = undistort_radial(m_d, xi)?;
                    // the forward model must be real-valued and land on the
                    // invertible branch at every image corner
                    distort_radial(m, xi)?;
                    if xi.abs() * m_d.norm_squared() >= 1.0 {
                        return Err(Error::ModelDomain(format!(
                            "xi = {xi} folds the image corner ({}, {})",
                            corner.x, corner.y
                        )));
                    }
                }
            }
            CameraKind::GenericFisheye(params) => {
                let det = params.stretch.determinant();
                if det.abs() <= 1e-12 || !det.is_finite() {
                    return Err(Error::invalid(format!(
                        "stretch matrix is singular (det = {det})"
                    )));
                }
                if let Some(fwd) = &params.forward_poly {
                    if fwd.is_empty() {
                        return Err(Error::invalid("forward polynomial must have coefficients"));
                    }
                }
                model.stretch_inv = params.stretch.try_inverse().expect("determinant checked");
                model.max_rho = model
                    .corners()
                    .iter()
                    .map(|c| (model.stretch_inv * (c - principal_point)).norm())
                    .fold(0.0, f64::max);
            }
        }
        Ok(model)
    }

    fn corners(&self) -> [Vector2<f64>; 4] {
        let (w, h) = ((self.width - 1) as f64, (self.height - 1) as f64);
        [
            Vector2::new(0.0, 0.0),
            Vector2::new(w, 0.0),
            Vector2::new(0.0, h),
            Vector2::new(w, h),
        ]
    }

    #[inline]
    pub fn kind(&self) -> &CameraKind {
        &self.kind
    }

    /// Distance of the anchoring plane from the normalized image plane.
    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn principal_point(&self) -> Vector2<f64> {
        self.principal_point
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_pinhole(&self) -> bool {
        matches!(self.kind, CameraKind::Pinhole)
    }

    /// Undistorted pinhole camera sharing this model's lambda, principal
    /// point and image size.
    pub fn pinhole_equivalent(&self) -> Self {
        Self::pinhole(self.lambda, self.principal_point, self.width, self.height)
            .expect("parameters already validated")
    }

    /// True if the pixel lies within `[0, w-1] x [0, h-1]`.
    #[inline]
    pub fn contains(&self, pixel: &Vector2<f64>) -> bool {
        pixel.x >= 0.0
            && pixel.y >= 0.0
            && pixel.x <= (self.width - 1) as f64
            && pixel.y <= (self.height - 1) as f64
    }

    /// Bearing vector of an in-image pixel.
    pub fn unproject(&self, pixel: Vector2<f64>) -> Result<BearingVector> {
        if !self.contains(&pixel) {
            return Err(Error::ModelDomain(format!(
                "pixel ({}, {}) outside {}x{} image",
                pixel.x, pixel.y, self.width, self.height
            )));
        }
        BearingVector::new(self.ray(pixel)?)
    }

    /// Unnormalized viewing ray through a pixel; no bounds check.
    pub(crate) fn ray(&self, pixel: Vector2<f64>) -> Result<Vector3<f64>> {
        let centered = pixel - self.principal_point;
        match &self.kind {
            CameraKind::Pinhole => {
                let m = centered / self.lambda;
                Ok(Vector3::new(m.x, m.y, 1.0))
            }
            CameraKind::PinholeRadial { xi } => {
                let m = undistort_radial(centered / self.lambda, *xi)?;
                Ok(Vector3::new(m.x, m.y, 1.0))
            }
            CameraKind::GenericFisheye(params) => {
                let m = self.stretch_inv * centered;
                let rho = m.norm();
                Ok(Vector3::new(m.x, m.y, params.unproj(rho)))
            }
        }
    }

    /// Pixel position of a 3-D point given in the camera frame.
    ///
    /// The result is not bounds-checked; use [`CameraModel::contains`].
    pub fn project(&self, p: &Vector3<f64>) -> Result<Vector2<f64>> {
        match &self.kind {
            CameraKind::Pinhole | CameraKind::PinholeRadial { .. } => {
                if !(p.z > 0.0) {
                    return Err(Error::ModelDomain(format!(
                        "point ({}, {}, {}) not in front of the camera",
                        p.x, p.y, p.z
                    )));
                }
                let m = Vector2::new(p.x / p.z, p.y / p.z);
                let m = match self.kind {
                    CameraKind::PinholeRadial { xi } => distort_radial(m, xi)?,
                    _ => m,
                };
                Ok(m * self.lambda + self.principal_point)
            }
            CameraKind::GenericFisheye(params) => {
                let r = (p.x * p.x + p.y * p.y).sqrt();
                if r == 0.0 {
                    if p.z > 0.0 {
                        return Ok(self.principal_point);
                    }
                    return Err(Error::ModelDomain(
                        "point on the negative optical axis".into(),
                    ));
                }
                let theta = (p.z / r).atan();
                let rho = match &params.forward_poly {
                    Some(coeffs) => coeffs.iter().rev().fold(0.0, |acc, c| acc * theta + c),
                    None => self.solve_rho(params, r, p.z)?,
                };
                if !(rho >= 0.0) || !rho.is_finite() {
                    return Err(Error::ModelDomain(format!(
                        "no valid image radius for theta = {theta}"
                    )));
                }
                let m = Vector2::new(rho * p.x / r, rho * p.y / r);
                Ok(params.stretch * m + self.principal_point)
            }
        }
    }

    /// Image radius `rho` on the ray with planar radius `r` and height `z`,
    /// i.e. the root of `r f(rho) - z rho = 0`.
    fn solve_rho(&self, params: &FisheyeParams, r: f64, z: f64) -> Result<f64> {
        let cap = 2.0 * self.max_rho.max(self.lambda);
        let mut rho = if z > 0.0 {
            // lambda * tan(pi/2 - theta)
            (self.lambda * r / z).min(cap)
        } else {
            cap
        };
        for _ in 0..NEWTON_MAX_ITERS {
            let g = r * params.unproj(rho) - z * rho;
            let dg = r * params.unproj_derivative(rho) - z;
            if dg == 0.0 || !dg.is_finite() {
                break;
            }
            let step = g / dg;
            rho -= step;
            if step.abs() < NEWTON_TOL {
                return Ok(rho);
            }
        }
        Err(Error::ModelDomain(format!(
            "fisheye projection did not converge for r = {r}, z = {z}"
        )))
    }
}
