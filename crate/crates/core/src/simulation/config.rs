use std::collections::HashSet;
use std::path::{Path, PathBuf};

use nalgebra::{Vector2, Vector3};

use super::experiment::{DescriptorSetup, RecognitionOptions};
use super::scene::{linear_trajectory, PlaneTexture, SimSequence};
use super::texture::procedural_texture;
use crate::camera::{read_calibration, CameraModel, FisheyeParams};
use crate::descriptor::{read_test_set, ExtractOptions, TestSet, Variant};
use crate::error::{Error, Result};
use crate::imageproc::read_pgm;

/// Built-in virtual cameras, all 640x480.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LensPreset {
    Pinhole,
    Radial,
    Fisheye,
}

impl LensPreset {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pinhole" => Ok(Self::Pinhole),
            "radial" => Ok(Self::Radial),
            "fisheye" => Ok(Self::Fisheye),
            _ => Err(Error::invalid(format!("unknown lens preset `{s}`"))),
        }
    }

    /// Camera model of the preset. The fisheye uses the fourth-order
    /// expansion of an equidistant lens with focal length 300 px.
    pub fn model(self) -> CameraModel {
        let pp = Vector2::new(320.0, 240.0);
        match self {
            Self::Pinhole => CameraModel::pinhole(PRESET_LAMBDA, pp, 640, 480),
            Self::Radial => CameraModel::pinhole_radial(PRESET_LAMBDA, -1.0 / 64.0, pp, 640, 480),
            Self::Fisheye => {
                let f = PRESET_FISHEYE_F;
                CameraModel::fisheye(
                    FisheyeParams::symmetric([f, -1.0 / (3.0 * f), 0.0, -1.0 / (45.0 * f * f * f)]),
                    pp,
                    640,
                    480,
                )
            }
        }
        .expect("preset parameters are valid")
    }

    /// Camera travel along x in world units (one texel per unit).
    fn default_travel(self) -> f64 {
        match self {
            Self::Pinhole | Self::Radial => 300.0,
            Self::Fisheye => 180.0,
        }
    }
}

const PRESET_LAMBDA: f64 = 100.0;
const PRESET_FISHEYE_F: f64 = 300.0;

#[derive(Clone, Debug, PartialEq)]
pub enum TextureSource {
    Procedural {
        width: usize,
        height: usize,
        seed: u64,
    },
    File(PathBuf),
}

/// Everything needed to run the planar-scene experiments.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub model: CameraModel,
    pub texture: TextureSource,
    pub texel_size: f64,
    /// Camera distance from the plane (world units).
    pub height: f64,
    /// Camera position of view 0 in the plane's x-y coordinates.
    pub start: Vector2<f64>,
    /// Total camera displacement from the first to the last view.
    pub travel: Vector2<f64>,
    pub views: usize,
    pub evolution_views: usize,
    /// Plane point whose evolution is reported; averaged when several.
    pub evolution_points: Vec<Vector2<f64>>,
    pub n_points: usize,
    pub variants: Vec<Variant>,
    pub seed: u64,
    pub dim: usize,
    pub patch_size: usize,
    pub tests: Option<PathBuf>,
    pub supersample: usize,
    pub smooth_sigma: f64,
    pub rot_magnitude: f64,
    pub border_margin: f64,
    pub start_radius: Option<f64>,
    /// Steer recognition tests with per-view intensity-centroid angles.
    pub oriented: bool,
}

impl SimConfig {
    pub fn preset(lens: LensPreset) -> Self {
        let model = lens.model();
        let height = model.lambda();
        Self {
            model,
            texture: TextureSource::Procedural {
                width: 1600,
                height: 1200,
                seed: 7,
            },
            texel_size: 1.0,
            height,
            start: Vector2::zeros(),
            travel: Vector2::new(lens.default_travel(), 0.0),
            views: 10,
            evolution_views: 40,
            evolution_points: vec![Vector2::zeros()],
            n_points: 200,
            variants: Variant::ALL.to_vec(),
            seed: 1,
            dim: 256,
            patch_size: 32,
            tests: None,
            supersample: 3,
            smooth_sigma: 2.0,
            rot_magnitude: 20f64.to_radians(),
            border_margin: 20.0,
            start_radius: None,
            oriented: true,
        }
    }

    /// `key = value` lines; `#` starts a comment. A `preset` key, if
    /// present, must come first. Relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = Self::preset(LensPreset::Radial);
        let mut seen = HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad =
                |msg: String| Error::parse("simulation config", format!("line {}: {msg}", n + 1));
            let Some((key, value)) = line.split_once('=') else {
                return Err(bad("expected `key = value`".into()));
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(bad(format!("duplicate key `{key}`")));
            }
            let num = |v: &str| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| bad(format!("`{key}` expects a number")))
            };
            let int = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| bad(format!("`{key}` expects a non-negative integer")))
            };
            let pair = |v: &str| -> Result<Vector2<f64>> {
                let p: Vec<&str> = v.split(',').map(str::trim).collect();
                if p.len() != 2 {
                    return Err(bad(format!("`{key}` expects `x,y`")));
                }
                Ok(Vector2::new(num(p[0])?, num(p[1])?))
            };
            match key {
                "preset" => {
                    if seen.len() != 1 {
                        return Err(bad("`preset` must be the first key".into()));
                    }
                    cfg = Self::preset(LensPreset::parse(value).map_err(|e| bad(e.to_string()))?);
                }
                "calibration" => cfg.model = read_calibration(base.join(value))?,
                "texture" => cfg.texture = TextureSource::File(base.join(value)),
                "texture_seed" => match &mut cfg.texture {
                    TextureSource::Procedural { seed, .. } => {
                        *seed = value.parse().map_err(|_| bad("bad seed".into()))?
                    }
                    TextureSource::File(_) => {
                        return Err(bad("`texture_seed` needs a procedural texture".into()))
                    }
                },
                "texel_size" => cfg.texel_size = num(value)?,
                "height" => cfg.height = num(value)?,
                "start" => cfg.start = pair(value)?,
                "travel" => cfg.travel = pair(value)?,
                "views" => cfg.views = int(value)?,
                "evolution_views" => cfg.evolution_views = int(value)?,
                "evolution_points" => {
                    cfg.evolution_points = value.split(';').map(pair).collect::<Result<_>>()?;
                }
                "n_points" => cfg.n_points = int(value)?,
                "variants" => {
                    cfg.variants = value
                        .split(',')
                        .map(|v| v.trim().parse::<Variant>())
                        .collect::<Result<_>>()
                        .map_err(|e| bad(e.to_string()))?;
                }
                "seed" => cfg.seed = value.parse().map_err(|_| bad("bad seed".into()))?,
                "dim" => cfg.dim = int(value)?,
                "patch_size" => cfg.patch_size = int(value)?,
                "tests" => cfg.tests = Some(base.join(value)),
                "supersample" => cfg.supersample = int(value)?,
                "sigma" => cfg.smooth_sigma = num(value)?,
                "rot_magnitude_deg" => cfg.rot_magnitude = num(value)?.to_radians(),
                "border_margin" => cfg.border_margin = num(value)?,
                "start_radius" => cfg.start_radius = Some(num(value)?),
                "oriented" => {
                    cfg.oriented = value
                        .parse()
                        .map_err(|_| bad("`oriented` expects true or false".into()))?
                }
                _ => return Err(bad(format!("unknown key `{key}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.views < 2 || self.evolution_views < 2 {
            return Err(Error::invalid("sequences need at least two views"));
        }
        if !(self.height > 0.0) || !(self.texel_size > 0.0) {
            return Err(Error::invalid(
                "camera height and texel size must be positive",
            ));
        }
        if self.variants.is_empty() || self.evolution_points.is_empty() {
            return Err(Error::invalid(
                "need at least one variant and one evolution point",
            ));
        }
        if self.n_points == 0 || self.dim == 0 || self.supersample == 0 {
            return Err(Error::invalid(
                "n_points, dim and supersample must be positive",
            ));
        }
        Ok(())
    }

    pub fn plane_texture(&self) -> Result<PlaneTexture> {
        let image = match &self.texture {
            TextureSource::Procedural {
                width,
                height,
                seed,
            } => procedural_texture(*width, *height, *seed)?,
            TextureSource::File(path) => read_pgm(path)?,
        };
        PlaneTexture::new(image, self.texel_size)
    }

    fn sequence(&self, texture: PlaneTexture, views: usize) -> Result<SimSequence> {
        let start = Vector3::new(self.start.x, self.start.y, -self.height);
        let step = self.travel / (views - 1) as f64;
        let poses = linear_trajectory(start, Vector3::new(step.x, step.y, 0.0), views);
        SimSequence::new(self.model.clone(), texture, poses)?.with_supersample(self.supersample)
    }

    pub fn recognition_sequence(&self, texture: PlaneTexture) -> Result<SimSequence> {
        self.sequence(texture, self.views)
    }

    pub fn evolution_sequence(&self, texture: PlaneTexture) -> Result<SimSequence> {
        self.sequence(texture, self.evolution_views)
    }

    pub fn descriptor_setup(&self) -> Result<DescriptorSetup> {
        let tests = match &self.tests {
            Some(path) => read_test_set(path)?,
            None => TestSet::random_gaussian(self.patch_size, self.dim, self.seed)?,
        };
        Ok(DescriptorSetup {
            tests,
            options: ExtractOptions {
                use_orientation: false,
                smooth_sigma: self.smooth_sigma,
                rot_magnitude: self.rot_magnitude,
                seed: self.seed,
                ..Default::default()
            },
        })
    }

    pub fn recognition_options(&self) -> RecognitionOptions {
        RecognitionOptions {
            n_points: self.n_points,
            border_margin: self.border_margin,
            start_radius: self.start_radius,
            oriented: self.oriented,
            ..Default::default()
        }
    }
}
