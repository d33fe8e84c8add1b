use crate::descriptor::{TestPair, TestSet};
use crate::error::{Error, Result};

/// Every unordered pair of pixels in an `S x S` patch, as offsets from the
/// patch origin at pixel `(S/2, S/2)`.
///
/// Pairs are listed in raster order of the first pixel, then of the second.
/// With `filtered`, pixels on the one-pixel patch border are dropped and
/// only pairs with `3 < d < ceil(9S/10)` are kept (`d` Euclidean).
pub fn enumerate_candidate_tests(patch_size: usize, filtered: bool) -> Result<TestSet> {
    if patch_size < 2 || !patch_size.is_multiple_of(2) {
        return Err(Error::invalid(
            "candidate patch size must be even and at least 2",
        ));
    }
    let s = patch_size as i64;
    let half = s / 2;
    let range = if filtered { 1..s - 1 } else { 0..s };
    let pixels: Vec<(i64, i64)> = range
        .clone()
        .flat_map(|y| range.clone().map(move |x| (x, y)))
        .collect();
    let max_d = (9 * s).div_euclid(10) + i64::from((9 * s) % 10 != 0);
    let (min_d2, max_d2) = (9, max_d * max_d);

    let mut pairs = Vec::new();
    for (i, &(x1, y1)) in pixels.iter().enumerate() {
        for &(x2, y2) in &pixels[i + 1..] {
            if filtered {
                let d2 = (x2 - x1).pow(2) + (y2 - y1).pow(2);
                if d2 <= min_d2 || d2 >= max_d2 {
                    continue;
                }
            }
            pairs.push(TestPair::new(
                (x1 - half) as f64,
                (y1 - half) as f64,
                (x2 - half) as f64,
                (y2 - half) as f64,
            ));
        }
    }
    TestSet::new(pairs, patch_size)
}
