mod common;

use mdbrief::camera::{distort_radial, undistort_radial, CameraModel, FisheyeParams};
use mdbrief::descriptor::{decode_descriptors, encode_descriptors, BinaryDescriptor, TestSet};
use mdbrief::detector::Keypoint;
use mdbrief::evaluation::{bhattacharyya, pr_curve, GroundTruth};
use mdbrief::learning::{compute_variances, greedy_select, LearnOptions};
use mdbrief::matching::{hamming, masked_hamming, match_brute_force, MatchOptions};
use nalgebra::{Vector2, Vector3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn descriptor(dim: usize) -> impl Strategy<Value = BinaryDescriptor> {
    prop::collection::vec(any::<bool>(), dim).prop_map(|b| BinaryDescriptor::from_bits(&b))
}

fn masked_descriptor(dim: usize) -> impl Strategy<Value = BinaryDescriptor> {
    (
        prop::collection::vec(any::<bool>(), dim),
        prop::collection::vec(any::<bool>(), dim),
    )
        .prop_map(|(b, mut m)| {
            m[0] = true;
            BinaryDescriptor::from_bits(&b)
                .with_mask(&BinaryDescriptor::from_bits(&m))
                .unwrap()
        })
}

proptest! {
    #[test]
    fn hamming_is_a_metric(a in descriptor(256), b in descriptor(256), c in descriptor(256)) {
        let d = |x: &BinaryDescriptor, y: &BinaryDescriptor| hamming(x, y).unwrap();
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        prop_assert_eq!(d(&a, &b) == 0, a == b);
        prop_assert_eq!(d(&a, &a.complement()), 256);
    }

    #[test]
    fn full_masks_reduce_to_scaled_hamming(a in descriptor(256), b in descriptor(256)) {
        let ones = BinaryDescriptor::from_bits(&[true; 256]);
        let (ma, mb) = (a.clone().with_mask(&ones).unwrap(), b.clone().with_mask(&ones).unwrap());
        prop_assert_eq!(masked_hamming(&ma, &mb).unwrap(), 2.0 * hamming(&a, &b).unwrap() as f64 / 256.0);
    }

    #[test]
    fn masked_distance_symmetric_and_bounded(a in masked_descriptor(128), b in masked_descriptor(128)) {
        let d = masked_hamming(&a, &b).unwrap();
        prop_assert_eq!(d, masked_hamming(&b, &a).unwrap());
        prop_assert!((0.0..=2.0).contains(&d));
        prop_assert_eq!(masked_hamming(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn radial_round_trip(x in -3.0f64..3.0, y in -3.0f64..3.0, xi in prop::sample::select(vec![0.0, -1.0 / 64.0, -0.05])) {
        let m = Vector2::new(x, y);
        let back = distort_radial(undistort_radial(m, xi).unwrap(), xi).unwrap();
        prop_assert!((back - m).norm() < 1e-9);
    }

    #[test]
    fn fisheye_project_unproject(px in 20.0f64..620.0, py in 20.0f64..460.0) {
        let f = 300.0;
        let cam = CameraModel::fisheye(
            FisheyeParams::symmetric([f, -1.0 / (3.0 * f), 0.0, -1.0 / (45.0 * f * f * f)]),
            Vector2::new(320.0, 240.0),
            640,
            480,
        )
        .unwrap();
        let p = Vector2::new(px, py);
        let v = cam.unproject(p).unwrap();
        let back = cam.project(&(v.as_vector() * 7.0)).unwrap();
        prop_assert!((back - p).norm() < 1e-4);
    }

    #[test]
    fn descriptor_records_round_trip(bits in prop::collection::vec(descriptor(64), 0..8), x in 0.0f64..100.0) {
        let records: Vec<_> = bits.into_iter().map(|d| (Keypoint::new(x.floor(), 3.0), d)).collect();
        let decoded = decode_descriptors(&encode_descriptors(&records).unwrap()).unwrap();
        prop_assert_eq!(decoded, records);
    }

    #[test]
    fn bhattacharyya_symmetric_bounded(raw_p in prop::collection::vec(0.0f64..1.0, 8), raw_q in prop::collection::vec(0.0f64..1.0, 8)) {
        let norm = |v: Vec<f64>| {
            let s: f64 = v.iter().sum::<f64>() + 1e-3;
            let mut out: Vec<f64> = v.iter().map(|x| x / s).collect();
            out[0] += 1.0 - out.iter().sum::<f64>();
            out
        };
        let (p, q) = (norm(raw_p), norm(raw_q));
        let c = bhattacharyya(&p, &q).unwrap();
        prop_assert!((c - bhattacharyya(&q, &p).unwrap()).abs() < 1e-15);
        prop_assert!((-1e-12..=1.0 + 1e-9).contains(&c));
    }
}

#[test]
fn matcher_agrees_with_exhaustive_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..60 {
        let masked = round % 2 == 1;
        let n_i = 1 + round % 23;
        let n_j = 1 + (round * 7) % 31;
        let set_i = common::tie_heavy_descriptors(&mut rng, n_i, 64, masked);
        let set_j = common::tie_heavy_descriptors(&mut rng, n_j, 64, masked);
        for cross_check in [false, true] {
            for threshold in [None, Some(if masked { 0.05 } else { 2.0 })] {
                let opts = MatchOptions {
                    masked,
                    threshold,
                    cross_check,
                };
                let got = match_brute_force(&set_i, &set_j, &opts).unwrap();
                let want = common::reference_match(&set_i, &set_j, masked, threshold, cross_check);
                assert_eq!(
                    got, want,
                    "round {round} cross_check {cross_check} threshold {threshold:?}"
                );
            }
        }
    }
}

#[test]
fn streaming_variances_match_dense_matrix() {
    let corpus = common::random_corpus(80, 16, 5);
    let q = TestSet::random_gaussian(16, 300, 2).unwrap();
    for rotate in [false, true] {
        let opts = LearnOptions {
            rotate_with_orientation: rotate,
            geometry: None,
        };
        let stats = compute_variances(&corpus, &q, &opts).unwrap();
        let dense = common::dense_outcomes(&corpus, &q, rotate);
        for (k, s) in stats.iter().enumerate() {
            let ones = common::column(&dense, k).iter().filter(|&&b| b).count();
            let alpha = ones as f64 / corpus.len() as f64;
            assert_eq!(s.alpha.to_bits(), alpha.to_bits());
            assert_eq!(s.variance.to_bits(), (alpha * (1.0 - alpha)).to_bits());
        }
    }
}

#[test]
fn greedy_selection_replays_consistently() {
    let corpus = common::random_corpus(120, 16, 9);
    let q = TestSet::random_gaussian(16, 400, 4).unwrap();
    let opts = LearnOptions::default();
    let stats = compute_variances(&corpus, &q, &opts).unwrap();
    let sel = greedy_select(&stats, &corpus, 48, &opts).unwrap();
    assert_eq!(sel.tests.dim(), 48);
    let dense = common::dense_outcomes(&corpus, &q, true);
    common::replay_selection(&sel, &stats, &dense).unwrap();
    for (x, &a) in sel.admitted.iter().enumerate() {
        for &b in &sel.admitted[..x] {
            let c = mdbrief::learning::correlation(
                &common::column(&dense, a),
                &common::column(&dense, b),
            )
            .unwrap();
            assert!(c < sel.final_threshold, "{a} vs {b}: {c}");
        }
    }
}

#[test]
fn recall_and_match_count_monotone_in_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for round in 0..20 {
        let a = common::tie_heavy_descriptors(&mut rng, 30, 128, false);
        let b = common::tie_heavy_descriptors(&mut rng, 30, 128, false);
        let gt = GroundTruth {
            pairs: (0..30).map(|i| (i, (i * 7 + round) % 30)).collect(),
            radius: 3.0,
        };
        let thresholds: Vec<f64> = (0..=128).map(|t| t as f64).collect();
        let curve = pr_curve(&a, &b, &gt, &thresholds, false).unwrap();
        for w in curve.windows(2) {
            assert!(w[0].threshold < w[1].threshold);
            assert!(w[0].recall <= w[1].recall);
        }
    }
}

#[test]
fn pinhole_round_trip_is_tight() {
    let cam = CameraModel::pinhole_radial(100.0, -1.0 / 64.0, Vector2::new(320.0, 240.0), 640, 480)
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    use rand::Rng;
    for _ in 0..2000 {
        let p = Vector2::new(rng.random_range(0.0..639.0), rng.random_range(0.0..479.0));
        let v = cam.unproject(p).unwrap();
        let back = cam.project(&Vector3::from(*v.as_vector())).unwrap();
        assert!((back - p).norm() < 1e-6);
    }
}
