use nalgebra::Vector2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// One binary test: compare intensity at offset `a` against offset `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestPair {
    pub a: Vector2<f64>,
    pub b: Vector2<f64>,
}

impl TestPair {
    pub fn new(ax: f64, ay: f64, bx: f64, by: f64) -> Self {
        Self {
            a: Vector2::new(ax, ay),
            b: Vector2::new(bx, by),
        }
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }
}

/// Ordered list of binary tests in patch coordinates (origin at the
/// keypoint, y down).
#[derive(Clone, Debug, PartialEq)]
pub struct TestSet {
    pairs: Vec<TestPair>,
    patch_size: usize,
}

impl TestSet {
    /// Validates that every endpoint lies within `[-S/2, S/2]^2`.
    pub fn new(pairs: Vec<TestPair>, patch_size: usize) -> Result<Self> {
        if patch_size == 0 {
            return Err(Error::invalid("patch size must be positive"));
        }
        if pairs.is_empty() {
            return Err(Error::invalid("test set must contain at least one test"));
        }
        let half = patch_size as f64 / 2.0;
        for (i, p) in pairs.iter().enumerate() {
            for e in [p.a, p.b] {
                if !(e.x.abs() <= half && e.y.abs() <= half) {
                    return Err(Error::invalid(format!(
                        "test {i}: endpoint ({}, {}) outside patch of size {patch_size}",
                        e.x, e.y
                    )));
                }
            }
        }
        Ok(Self { pairs, patch_size })
    }

    #[inline]
    pub fn pairs(&self) -> &[TestPair] {
        &self.pairs
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    #[inline]
    pub fn patch_size(&self) -> usize {
        self.patch_size
    }

    /// First `dim` tests.
    pub fn truncated(&self, dim: usize) -> Result<Self> {
        if dim == 0 || dim > self.dim() {
            return Err(Error::invalid(format!(
                "cannot take {dim} of {} tests",
                self.dim()
            )));
        }
        Ok(Self {
            pairs: self.pairs[..dim].to_vec(),
            patch_size: self.patch_size,
        })
    }

    /// BRIEF-style random tests: both endpoints drawn i.i.d. from an
    /// isotropic Gaussian with sigma `S/5`, rounded to integers and clipped
    /// one pixel inside the patch. Degenerate pairs are redrawn.
    pub fn random_gaussian(patch_size: usize, dim: usize, seed: u64) -> Result<Self> {
        if patch_size < 4 {
            return Err(Error::invalid("patch size must be at least 4"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, patch_size as f64 / 5.0).expect("positive sigma");
        let lim = patch_size as f64 / 2.0 - 1.0;
        let draw = |rng: &mut ChaCha8Rng| {
            Vector2::new(
                normal.sample(rng).round().clamp(-lim, lim),
                normal.sample(rng).round().clamp(-lim, lim),
            )
        };
        let mut pairs = Vec::with_capacity(dim);
        while pairs.len() < dim {
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            if a != b {
                pairs.push(TestPair { a, b });
            }
        }
        Self::new(pairs, patch_size)
    }
}

#[inline]
pub(crate) fn rotate(v: Vector2<f64>, cos: f64, sin: f64) -> Vector2<f64> {
    Vector2::new(cos * v.x - sin * v.y, sin * v.x + cos * v.y)
}

/// Rotates every endpoint about the patch origin (y-down convention, so
/// `pi/2` maps `(3, 0)` to `(0, 3)`).
///
/// The result may extend to the patch's circumscribed disc.
pub fn rotate_tests(q: &TestSet, angle: f64) -> TestSet {
    let (sin, cos) = angle.sin_cos();
    TestSet {
        pairs: q
            .pairs
            .iter()
            .map(|p| TestPair {
                a: rotate(p.a, cos, sin),
                b: rotate(p.b, cos, sin),
            })
            .collect(),
        patch_size: q.patch_size,
    }
}
