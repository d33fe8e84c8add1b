use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::detector::Keypoint;
use crate::error::{Error, Result};
use crate::imageproc::{read_pgm, write_pgm, GrayImage};

pub const MANIFEST_NAME: &str = "manifest.txt";

/// One `S x S` training patch, already smoothed, centred on pixel
/// `(S/2, S/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusPatch {
    pub image: GrayImage,
    pub angle: f64,
    /// Full-image keypoint the patch was cut around. Required for distorted
    /// learning; the patch's top-left pixel is `round(kp) - S/2`.
    pub keypoint: Option<Keypoint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchCorpus {
    patches: Vec<CorpusPatch>,
    patch_size: usize,
    source: String,
}

impl PatchCorpus {
    pub fn new(
        patches: Vec<CorpusPatch>,
        patch_size: usize,
        source: impl Into<String>,
    ) -> Result<Self> {
        if patch_size == 0 {
            return Err(Error::invalid("patch size must be positive"));
        }
        for (i, p) in patches.iter().enumerate() {
            if p.image.width() != patch_size || p.image.height() != patch_size {
                return Err(Error::invalid(format!(
                    "patch {i} is {}x{}, expected {patch_size}x{patch_size}",
                    p.image.width(),
                    p.image.height()
                )));
            }
            if !p.angle.is_finite() {
                return Err(Error::invalid(format!("patch {i} has a non-finite angle")));
            }
        }
        Ok(Self {
            patches,
            patch_size,
            source: source.into(),
        })
    }

    pub fn patches(&self) -> &[CorpusPatch] {
        &self.patches
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn patch_size(&self) -> usize {
        self.patch_size
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Cuts one patch per keypoint from an already smoothed image. Keypoints
    /// whose patch would leave the image are skipped.
    pub fn from_image(
        smoothed: &GrayImage,
        kps: &[Keypoint],
        patch_size: usize,
        source: impl Into<String>,
    ) -> Result<Self> {
        let half = (patch_size / 2) as i64;
        let patches = kps
            .iter()
            .filter_map(|kp| {
                let x0 = kp.x.round() as i64 - half;
                let y0 = kp.y.round() as i64 - half;
                if x0 < 0 || y0 < 0 {
                    return None;
                }
                smoothed
                    .crop(x0 as usize, y0 as usize, patch_size, patch_size)
                    .ok()
                    .map(|image| CorpusPatch {
                        image,
                        angle: kp.angle,
                        keypoint: Some(*kp),
                    })
            })
            .collect();
        Self::new(patches, patch_size, source)
    }
}

/// Reads `manifest.txt` (`filename angle [x y octave]` per line, `#`
/// comments allowed) and the PGM patches it names.
pub fn read_corpus(dir: impl AsRef<Path>) -> Result<PatchCorpus> {
    let dir = dir.as_ref();
    let manifest = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&manifest)?;
    let ctx = manifest.display().to_string();
    let mut patches = Vec::new();
    let mut size = None;
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::parse(ctx.clone(), format!("line {}: {msg}", n + 1));
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 2 && f.len() != 5 {
            return Err(bad("expected `filename angle [x y octave]`"));
        }
        let angle: f64 = f[1]
            .parse()
            .ok()
            .filter(|a: &f64| a.is_finite())
            .ok_or_else(|| bad("bad angle"))?;
        let keypoint = if f.len() == 5 {
            let x: f64 = f[2].parse().map_err(|_| bad("bad x"))?;
            let y: f64 = f[3].parse().map_err(|_| bad("bad y"))?;
            let octave: u32 = f[4].parse().map_err(|_| bad("bad octave"))?;
            Some(Keypoint {
                x,
                y,
                angle,
                octave,
                score: 0.0,
            })
        } else {
            None
        };
        let image = read_pgm(dir.join(f[0]))?;
        let s = *size.get_or_insert(image.width());
        if image.width() != s || image.height() != s {
            return Err(bad(&format!("patch `{}` is not {s}x{s}", f[0])));
        }
        patches.push(CorpusPatch {
            image,
            angle,
            keypoint,
        });
    }
    let Some(size) = size else {
        return Err(Error::parse(ctx, "corpus is empty"));
    };
    PatchCorpus::new(patches, size, dir.display().to_string())
}

/// Writes `patch_NNNNNN.pgm` files and the manifest.
pub fn write_corpus(dir: impl AsRef<Path>, corpus: &PatchCorpus) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut manifest = String::new();
    for (i, p) in corpus.patches.iter().enumerate() {
        let name = format!("patch_{i:06}.pgm");
        write_pgm(dir.join(&name), &p.image)?;
        match &p.keypoint {
            Some(kp) => writeln!(
                manifest,
                "{name} {} {} {} {}",
                p.angle, kp.x, kp.y, kp.octave
            ),
            None => writeln!(manifest, "{name} {}", p.angle),
        }
        .unwrap();
    }
    fs::write(dir.join(MANIFEST_NAME), manifest)?;
    Ok(())
}
