//! Reference implementations used as test oracles. They favour obviousness
//! over speed.
#![allow(dead_code)]

use mdbrief::descriptor::{rotate_tests, BinaryDescriptor, TestSet};
use mdbrief::imageproc::GrayImage;
use mdbrief::learning::{correlation, CorpusPatch, PatchCorpus, Selection, TestStats};
use mdbrief::matching::{hamming, masked_hamming, Match};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smooth-ish random patches with random orientations.
pub fn random_corpus(n: usize, size: usize, seed: u64) -> PatchCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let patches = (0..n)
        .map(|_| {
            let (fx, fy, ph) = (
                rng.random_range(0.1..0.9),
                rng.random_range(0.1..0.9),
                rng.random_range(0.0..6.3),
            );
            let noise: Vec<u8> = (0..size * size).map(|_| rng.random_range(0..40)).collect();
            let image = GrayImage::from_fn(size, size, |x, y| {
                let v = 100.0 + 80.0 * (fx * x as f64 + fy * y as f64 + ph).sin();
                (v as u8).saturating_add(noise[y * size + x])
            })
            .unwrap();
            CorpusPatch {
                image,
                angle: rng.random_range(-3.1..3.1),
                keypoint: None,
            }
        })
        .collect();
    PatchCorpus::new(patches, size, "random").unwrap()
}

/// Full `patches x tests` outcome matrix, sampled directly per patch.
pub fn dense_outcomes(corpus: &PatchCorpus, q: &TestSet, rotate: bool) -> Vec<Vec<bool>> {
    let half = (corpus.patch_size() / 2) as f64;
    corpus
        .patches()
        .iter()
        .map(|p| {
            let r = rotate_tests(q, if rotate { p.angle } else { 0.0 });
            r.pairs()
                .iter()
                .map(|t| {
                    p.image.sample_clamped(half + t.a.x, half + t.a.y)
                        < p.image.sample_clamped(half + t.b.x, half + t.b.y)
                })
                .collect()
        })
        .collect()
}

pub fn column(matrix: &[Vec<bool>], test: usize) -> Vec<bool> {
    matrix.iter().map(|row| row[test]).collect()
}

/// Replays a greedy selection against the dense matrix. Returns a
/// description of the first inconsistency.
pub fn replay_selection(
    sel: &Selection,
    stats: &[TestStats],
    matrix: &[Vec<bool>],
) -> Result<(), String> {
    let mut admitted: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = (0..stats.len()).collect();
    order.sort_by(|&a, &b| {
        stats[b]
            .variance
            .total_cmp(&stats[a].variance)
            .then(a.cmp(&b))
    });
    admitted.push(order[0]);
    for pass in &sel.passes {
        for (k, &(c, ok)) in pass.scanned.iter().enumerate() {
            let col = column(matrix, c);
            let expect = admitted
                .iter()
                .all(|&a| correlation(&column(matrix, a), &col).unwrap() < pass.threshold);
            if expect != ok {
                return Err(format!(
                    "pass {} candidate {c}: admitted={ok}, replay says {expect}",
                    pass.pass
                ));
            }
            if ok {
                admitted.push(c);
            }
            // Tests admitted earlier in a pass never have lower variance
            // than a candidate the same pass rejects later.
            if !ok {
                let admitted_earlier = pass.scanned[..k].iter().filter(|s| s.1).map(|s| s.0);
                for a in admitted_earlier {
                    if stats[a].variance < stats[c].variance {
                        return Err(format!("admitted {a} has lower variance than rejected {c}"));
                    }
                }
            }
        }
    }
    if admitted != sel.admitted {
        return Err("admission order differs from replay".into());
    }
    Ok(())
}

/// Exhaustive nearest-neighbour matcher: lowest index wins ties.
pub fn reference_match(
    set_i: &[BinaryDescriptor],
    set_j: &[BinaryDescriptor],
    masked: bool,
    threshold: Option<f64>,
    cross_check: bool,
) -> Vec<Match> {
    let dist = |a: &BinaryDescriptor, b: &BinaryDescriptor| {
        if masked {
            masked_hamming(a, b).unwrap()
        } else {
            hamming(a, b).unwrap() as f64
        }
    };
    let best = |q: &BinaryDescriptor, set: &[BinaryDescriptor], flip: bool| -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for (k, t) in set.iter().enumerate() {
            let d = if flip { dist(t, q) } else { dist(q, t) };
            if d < best.1 {
                best = (k, d);
            }
        }
        best
    };
    if set_i.is_empty() || set_j.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, q) in set_i.iter().enumerate() {
        let (j, d) = best(q, set_j, false);
        if threshold.is_some_and(|t| d > t) {
            continue;
        }
        if cross_check && best(&set_j[j], set_i, true).0 != i {
            continue;
        }
        out.push(Match {
            index_i: i,
            index_j: j,
            distance: d,
        });
    }
    out
}

/// Random descriptors drawn from a small pool of bit patterns so that
/// distance ties are common.
pub fn tie_heavy_descriptors(
    rng: &mut ChaCha8Rng,
    n: usize,
    dim: usize,
    masked: bool,
) -> Vec<BinaryDescriptor> {
    let pool: Vec<Vec<bool>> = (0..4)
        .map(|_| (0..dim).map(|_| rng.random_bool(0.5)).collect())
        .collect();
    (0..n)
        .map(|_| {
            let mut bits = pool[rng.random_range(0..pool.len())].clone();
            for _ in 0..rng.random_range(0..3) {
                let k = rng.random_range(0..dim);
                bits[k] = !bits[k];
            }
            let d = BinaryDescriptor::from_bits(&bits);
            if masked {
                let mut mask: Vec<bool> = (0..dim).map(|_| rng.random_bool(0.8)).collect();
                mask[0] = true;
                d.with_mask(&BinaryDescriptor::from_bits(&mask)).unwrap()
            } else {
                d
            }
        })
        .collect()
}
