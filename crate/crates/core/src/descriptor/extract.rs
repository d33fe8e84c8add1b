use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::bits::BinaryDescriptor;
use super::project::{apply_tests, project_tests};
use super::testset::TestSet;
use crate::camera::CameraModel;
use crate::detector::Keypoint;
use crate::error::{Error, Result};
use crate::imageproc::{gaussian_smooth, GrayImage};
use crate::learning::{learn_mask, MaskConfig};

/// Descriptor flavours: plain or camera-distorted tests, with or without
/// an online stability mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Brief,
    DBrief,
    MBrief,
    MdBrief,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Brief,
        Variant::DBrief,
        Variant::MBrief,
        Variant::MdBrief,
    ];

    pub fn is_distorted(self) -> bool {
        matches!(self, Variant::DBrief | Variant::MdBrief)
    }

    pub fn is_masked(self) -> bool {
        matches!(self, Variant::MBrief | Variant::MdBrief)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Brief => "brief",
            Variant::DBrief => "dbrief",
            Variant::MBrief => "mbrief",
            Variant::MdBrief => "mdbrief",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown descriptor variant `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractOptions {
    pub use_orientation: bool,
    pub smooth_sigma: f64,
    /// Pyramid scale factor; offsets are scaled by `scale_factor^octave`.
    pub scale_factor: f64,
    /// Half-width of the uniform rotation range used for mask learning.
    pub rot_magnitude: f64,
    pub seed: u64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            use_orientation: true,
            smooth_sigma: 2.0,
            scale_factor: 1.2,
            rot_magnitude: 20f64.to_radians(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Described {
    /// Position in the input keypoint list.
    pub index: usize,
    pub keypoint: Keypoint,
    pub descriptor: BinaryDescriptor,
    pub clamped: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Skipped {
    pub index: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Extraction {
    pub described: Vec<Described>,
    pub skipped: Vec<Skipped>,
}

impl Extraction {
    pub fn descriptors(&self) -> Vec<BinaryDescriptor> {
        self.described
            .iter()
            .map(|d| d.descriptor.clone())
            .collect()
    }

    pub fn keypoints(&self) -> Vec<Keypoint> {
        self.described.iter().map(|d| d.keypoint).collect()
    }
}

/// Shared, immutable extraction setup for one image geometry.
#[derive(Clone, Debug)]
pub struct Extractor {
    variant: Variant,
    tests: TestSet,
    geometry: CameraModel,
    opts: ExtractOptions,
}

impl Extractor {
    /// Undistorted variants sample through the model's pinhole equivalent
    /// (same lambda and principal point, no lens).
    pub fn new(
        variant: Variant,
        tests: TestSet,
        model: &CameraModel,
        opts: ExtractOptions,
    ) -> Result<Self> {
        if !(opts.smooth_sigma >= 0.0 && opts.smooth_sigma.is_finite()) {
            return Err(Error::invalid(
                "smoothing sigma must be finite and non-negative",
            ));
        }
        if !(opts.scale_factor > 1.0) {
            return Err(Error::invalid("scale factor must exceed 1"));
        }
        if !(opts.rot_magnitude >= 0.0 && opts.rot_magnitude.is_finite()) {
            return Err(Error::invalid(
                "rotation magnitude must be finite and non-negative",
            ));
        }
        let geometry = if variant.is_distorted() {
            model.clone()
        } else {
            model.pinhole_equivalent()
        };
        Ok(Self {
            variant,
            tests,
            geometry,
            opts,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn tests(&self) -> &TestSet {
        &self.tests
    }

    pub fn options(&self) -> &ExtractOptions {
        &self.opts
    }

    pub fn smooth(&self, img: &GrayImage) -> Result<GrayImage> {
        if self.opts.smooth_sigma > 0.0 {
            gaussian_smooth(img, self.opts.smooth_sigma)
        } else {
            Ok(img.clone())
        }
    }

    /// Describes one keypoint on an already smoothed image. `index` only
    /// feeds the per-keypoint mask seed.
    pub fn describe(&self, smoothed: &GrayImage, kp: &Keypoint, index: usize) -> Result<Described> {
        let angle = if self.opts.use_orientation {
            kp.angle
        } else {
            0.0
        };
        let (descriptor, clamped) = if self.variant.is_masked() {
            let learned = learn_mask(
                smoothed,
                kp,
                &self.tests,
                &self.geometry,
                &MaskConfig {
                    angle,
                    scale_factor: self.opts.scale_factor,
                    rot_magnitude: self.opts.rot_magnitude,
                    seed: self.opts.seed ^ index as u64,
                },
            )?;
            (learned.descriptor, learned.clamped)
        } else {
            let pts = project_tests(
                &self.tests,
                kp,
                &self.geometry,
                angle,
                self.opts.scale_factor,
            )?;
            (apply_tests(smoothed, &pts), pts.clamped)
        };
        Ok(Described {
            index,
            keypoint: *kp,
            descriptor,
            clamped,
        })
    }

    pub fn extract_smoothed(&self, smoothed: &GrayImage, kps: &[Keypoint]) -> Result<Extraction> {
        if smoothed.width() != self.geometry.width() || smoothed.height() != self.geometry.height()
        {
            return Err(Error::invalid(format!(
                "image is {}x{} but the camera model is {}x{}",
                smoothed.width(),
                smoothed.height(),
                self.geometry.width(),
                self.geometry.height()
            )));
        }
        let results: Vec<Result<Described>> = kps
            .par_iter()
            .enumerate()
            .map(|(i, kp)| self.describe(smoothed, kp, i))
            .collect();
        let mut out = Extraction::default();
        for (index, r) in results.into_iter().enumerate() {
            match r {
                Ok(d) => out.described.push(d),
                Err(e) => out.skipped.push(Skipped {
                    index,
                    reason: e.to_string(),
                }),
            }
        }
        Ok(out)
    }

    /// Smooths once, then describes every keypoint in input order.
    /// Keypoints the model cannot anchor are reported in `skipped`.
    pub fn extract(&self, img: &GrayImage, kps: &[Keypoint]) -> Result<Extraction> {
        self.extract_smoothed(&self.smooth(img)?, kps)
    }
}
