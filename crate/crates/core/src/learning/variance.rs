use std::collections::HashMap;

use nalgebra::Vector2;
use rayon::prelude::*;

use super::corpus::PatchCorpus;
use crate::camera::CameraModel;
use crate::descriptor::project_offsets;
use crate::descriptor::{rotate, TestPair, TestSet};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestStats {
    pub test: TestPair,
    /// Position in the candidate list; breaks variance ties.
    pub index: usize,
    pub alpha: f64,
    pub variance: f64,
}

/// How corpus patches are sampled during offline learning.
#[derive(Clone, Debug)]
pub struct LearnOptions {
    /// Rotate each test by the patch orientation before applying it.
    pub rotate_with_orientation: bool,
    /// Route tests through a camera model (distorted offline learning).
    /// Every patch must then carry its full-image keypoint.
    pub geometry: Option<(CameraModel, f64)>,
}

impl Default for LearnOptions {
    fn default() -> Self {
        Self {
            rotate_with_orientation: true,
            geometry: None,
        }
    }
}

/// Sampled intensity of every distinct test endpoint in every patch.
/// Test outcomes become two table lookups.
pub(crate) struct OutcomeTable {
    /// Per test: indices of its two endpoints into `values` rows.
    endpoints: Vec<(u32, u32)>,
    /// Row-major `patches x distinct endpoints`.
    values: Vec<f64>,
    stride: usize,
    n_patches: usize,
}

impl OutcomeTable {
    pub(crate) fn build(
        corpus: &PatchCorpus,
        tests: &[TestPair],
        opts: &LearnOptions,
    ) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::invalid("patch corpus is empty"));
        }
        let key = |v: Vector2<f64>| (v.x.to_bits(), v.y.to_bits());
        let mut ids: HashMap<(u64, u64), u32> = HashMap::new();
        let mut distinct: Vec<Vector2<f64>> = Vec::new();
        let mut id_of = |v: Vector2<f64>| {
            *ids.entry(key(v)).or_insert_with(|| {
                distinct.push(v);
                (distinct.len() - 1) as u32
            })
        };
        let endpoints: Vec<(u32, u32)> = tests.iter().map(|t| (id_of(t.a), id_of(t.b))).collect();

        let half = (corpus.patch_size() / 2) as f64;
        let stride = distinct.len();
        let rows: Vec<Vec<f64>> = corpus
            .patches()
            .par_iter()
            .enumerate()
            .map(|(i, p)| -> Result<Vec<f64>> {
                let angle = if opts.rotate_with_orientation {
                    p.angle
                } else {
                    0.0
                };
                match &opts.geometry {
                    None => {
                        let (sin, cos) = angle.sin_cos();
                        Ok(distinct
                            .iter()
                            .map(|&o| {
                                let r = rotate(o, cos, sin);
                                p.image.sample_clamped(half + r.x, half + r.y)
                            })
                            .collect())
                    }
                    Some((model, scale_factor)) => {
                        let kp = p.keypoint.ok_or_else(|| {
                            Error::invalid(format!(
                                "patch {i} has no keypoint for distorted learning"
                            ))
                        })?;
                        let (points, _) = project_offsets(
                            distinct.iter().copied(),
                            &kp,
                            model,
                            angle,
                            *scale_factor,
                        )?;
                        let x0 = kp.x.round() - half;
                        let y0 = kp.y.round() - half;
                        Ok(points
                            .iter()
                            .map(|pt| p.image.sample_clamped(pt.x - x0, pt.y - y0))
                            .collect())
                    }
                }
            })
            .collect::<Result<_>>()?;

        Ok(Self {
            endpoints,
            values: rows.concat(),
            stride,
            n_patches: corpus.len(),
        })
    }

    pub(crate) fn n_patches(&self) -> usize {
        self.n_patches
    }

    #[inline]
    fn outcome(&self, test: usize, patch: usize) -> bool {
        let (a, b) = self.endpoints[test];
        let row = &self.values[patch * self.stride..(patch + 1) * self.stride];
        row[a as usize] < row[b as usize]
    }

    pub(crate) fn ones(&self, test: usize) -> usize {
        (0..self.n_patches)
            .filter(|&p| self.outcome(test, p))
            .count()
    }

    /// Outcomes of one test over all patches, packed LSB-first.
    pub(crate) fn column(&self, test: usize) -> Vec<u64> {
        let mut col = vec![0u64; self.n_patches.div_ceil(64)];
        for p in 0..self.n_patches {
            if self.outcome(test, p) {
                col[p / 64] |= 1 << (p % 64);
            }
        }
        col
    }
}

/// Ratio of ones `alpha` and variance `alpha (1 - alpha)` of every candidate
/// over the corpus. Only per-test counters are kept, never the full
/// patch-by-test outcome matrix.
pub fn compute_variances(
    corpus: &PatchCorpus,
    candidates: &TestSet,
    opts: &LearnOptions,
) -> Result<Vec<TestStats>> {
    let table = OutcomeTable::build(corpus, candidates.pairs(), opts)?;
    let p = table.n_patches() as f64;
    Ok(candidates
        .pairs()
        .par_iter()
        .enumerate()
        .map(|(index, &test)| {
            let alpha = table.ones(index) as f64 / p;
            TestStats {
                test,
                index,
                alpha,
                variance: alpha * (1.0 - alpha),
            }
        })
        .collect())
}
