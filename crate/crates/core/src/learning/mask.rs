use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::camera::CameraModel;
use crate::descriptor::{apply_tests, project_tests, BinaryDescriptor, TestSet};
use crate::detector::Keypoint;
use crate::error::Result;
use crate::imageproc::GrayImage;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaskConfig {
    /// Nominal test rotation (keypoint angle, or 0 without orientation).
    pub angle: f64,
    pub scale_factor: f64,
    /// Perturbation angles are drawn uniformly from `[-m, m]`.
    pub rot_magnitude: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnedMask {
    /// Descriptor at the nominal angle with the mask attached.
    pub descriptor: BinaryDescriptor,
    pub rotations: [f64; 2],
    /// Clamped endpoints of the nominal projection.
    pub clamped: usize,
}

impl LearnedMask {
    pub fn mask_ones(&self) -> u32 {
        self.descriptor.mask_ones()
    }
}

/// Describes the keypoint at the nominal angle and at two random nearby
/// angles; a test stays unmasked only if its bit agrees in all three.
/// If no test survives, every test is kept.
pub fn learn_mask(
    img: &GrayImage,
    kp: &Keypoint,
    q: &TestSet,
    model: &CameraModel,
    cfg: &MaskConfig,
) -> Result<LearnedMask> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = cfg.rot_magnitude;
    let rotations = [rng.random_range(-m..=m), rng.random_range(-m..=m)];

    let nominal = project_tests(q, kp, model, cfg.angle, cfg.scale_factor)?;
    let d0 = apply_tests(img, &nominal);
    let d1 = apply_tests(
        img,
        &project_tests(q, kp, model, cfg.angle + rotations[0], cfg.scale_factor)?,
    );
    let d2 = apply_tests(
        img,
        &project_tests(q, kp, model, cfg.angle + rotations[1], cfg.scale_factor)?,
    );

    let mut mask = BinaryDescriptor::zeros(q.dim());
    for d in 0..q.dim() {
        mask.set_bit(d, d0.bit(d) == d1.bit(d) && d0.bit(d) == d2.bit(d));
    }
    if mask.count_ones() == 0 {
        mask = BinaryDescriptor::zeros(q.dim()).complement();
    }
    Ok(LearnedMask {
        descriptor: d0.with_mask(&mask)?,
        rotations,
        clamped: nominal.clamped,
    })
}
