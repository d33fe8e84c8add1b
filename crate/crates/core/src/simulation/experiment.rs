use std::fmt::Write as _;

use nalgebra::Vector2;
use rayon::prelude::*;

use super::scene::SimSequence;
use crate::descriptor::{BinaryDescriptor, ExtractOptions, Extractor, TestSet, Variant};
use crate::detector::{detect_multiscale, orientation_centroid, DetectorConfig, Keypoint};
use crate::error::{Error, Result};
use crate::evaluation::{distance_histograms, DistanceHistograms, GroundTruth};
use crate::imageproc::{build_pyramid, GrayImage};
use crate::matching::{hamming, masked_hamming, match_brute_force, MatchOptions};

/// Descriptor setup shared by every variant of an experiment.
#[derive(Clone, Debug)]
pub struct DescriptorSetup {
    pub tests: TestSet,
    pub options: ExtractOptions,
}

impl DescriptorSetup {
    fn extractor(&self, variant: Variant, seq: &SimSequence) -> Result<Extractor> {
        Extractor::new(
            variant,
            self.tests.clone(),
            &seq.model,
            self.options.clone(),
        )
    }
}

/// Distance between two descriptors of one variant. Masked distances are
/// rescaled by `D/2` so they read as bits.
fn bit_distance(a: &BinaryDescriptor, b: &BinaryDescriptor, variant: Variant) -> Result<f64> {
    if variant.is_masked() {
        Ok(masked_hamming(a, b)? * a.dim() as f64 / 2.0)
    } else {
        Ok(hamming(a, b)? as f64)
    }
}

fn keypoints_at(pixels: &[Vector2<f64>]) -> Vec<Keypoint> {
    pixels.iter().map(|p| Keypoint::new(p.x, p.y)).collect()
}

/// Describes `kps` in `img`; every keypoint must succeed.
fn describe_all(
    ex: &Extractor,
    img: &GrayImage,
    kps: &[Keypoint],
    view: usize,
) -> Result<Vec<BinaryDescriptor>> {
    let out = ex.extract(img, kps)?;
    if let Some(s) = out.skipped.first() {
        return Err(Error::ModelDomain(format!(
            "view {view}: point {} could not be described: {}",
            s.index, s.reason
        )));
    }
    Ok(out.descriptors())
}

/// Distance to the view-0 descriptor, per view and variant.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionTable {
    pub variants: Vec<Variant>,
    /// `distances[view][variant]`, averaged over the tracked points.
    pub distances: Vec<Vec<f64>>,
}

impl EvolutionTable {
    pub fn final_distance(&self, variant: Variant) -> Option<f64> {
        let k = self.variants.iter().position(|&v| v == variant)?;
        self.distances.last().map(|row| row[k])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("view");
        for v in &self.variants {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
        for (k, row) in self.distances.iter().enumerate() {
            write!(out, "{k}").unwrap();
            for d in row {
                write!(out, ",{d:.3}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Tracks plane points through the sequence and describes them in every
/// view (orientation as configured), reporting the distance of each view's
/// descriptor to the view-0 descriptor. Several points are averaged.
pub fn hamming_evolution(
    seq: &SimSequence,
    points: &[Vector2<f64>],
    variants: &[Variant],
    setup: &DescriptorSetup,
) -> Result<EvolutionTable> {
    if points.is_empty() || variants.is_empty() {
        return Err(Error::invalid(
            "evolution needs at least one point and one variant",
        ));
    }
    let tracks = visible_tracks(seq, points)?;
    let views = seq.render_all()?;
    let per_variant: Vec<Vec<f64>> = variants
        .iter()
        .map(|&variant| -> Result<Vec<f64>> {
            let ex = setup.extractor(variant, seq)?;
            let descs: Vec<Vec<BinaryDescriptor>> = views
                .par_iter()
                .enumerate()
                .map(|(v, img)| describe_all(&ex, img, &keypoints_at(&tracks[v]), v))
                .collect::<Result<_>>()?;
            descs
                .iter()
                .map(|row| {
                    let total = row
                        .iter()
                        .zip(&descs[0])
                        .map(|(d, d0)| bit_distance(d0, d, variant))
                        .sum::<Result<f64>>()?;
                    Ok(total / points.len() as f64)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let distances = (0..seq.len())
        .map(|v| per_variant.iter().map(|col| col[v]).collect())
        .collect();
    Ok(EvolutionTable {
        variants: variants.to_vec(),
        distances,
    })
}

fn visible_tracks(seq: &SimSequence, points: &[Vector2<f64>]) -> Result<Vec<Vec<Vector2<f64>>>> {
    seq.track_points(points)
        .into_iter()
        .enumerate()
        .map(|(v, row)| {
            row.into_iter()
                .enumerate()
                .map(|(p, px)| {
                    px.ok_or_else(|| {
                        Error::ModelDomain(format!("point {p} not visible in view {v}"))
                    })
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct RecognitionOptions {
    pub n_points: usize,
    pub detector: DetectorConfig,
    /// Minimum distance of every tracked position from the image border.
    pub border_margin: f64,
    /// Only keypoints this close to the principal point in view 0 are used.
    pub start_radius: Option<f64>,
    /// Estimate the intensity-centroid orientation in every view and steer
    /// the tests with it, as an oriented detector would.
    pub oriented: bool,
}

impl Default for RecognitionOptions {
    fn default() -> Self {
        Self {
            n_points: 200,
            detector: DetectorConfig {
                n_target: usize::MAX,
                ..Default::default()
            },
            border_margin: 20.0,
            start_radius: None,
            oriented: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecognitionResult {
    pub variants: Vec<Variant>,
    /// View-0 keypoints that were tracked.
    pub keypoints: Vec<Keypoint>,
    /// `rates[view][variant]`.
    pub rates: Vec<Vec<f64>>,
    /// `histograms[view][variant]` for the pair (0, view).
    pub histograms: Vec<Vec<DistanceHistograms>>,
}

impl RecognitionResult {
    fn column(&self, variant: Variant) -> Option<usize> {
        self.variants.iter().position(|&v| v == variant)
    }

    pub fn final_rate(&self, variant: Variant) -> Option<f64> {
        Some(self.rates.last()?[self.column(variant)?])
    }

    pub fn bhattacharyya(&self, view: usize, variant: Variant) -> Option<f64> {
        self.histograms.get(view)?[self.column(variant)?]
            .bhattacharyya()
            .ok()
    }

    pub fn rates_csv(&self) -> String {
        let mut out = String::from("view");
        for v in &self.variants {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
        for (k, row) in self.rates.iter().enumerate() {
            write!(out, "{k}").unwrap();
            for r in row {
                write!(out, ",{r:.4}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// `view,variant,bhattacharyya` for every view pair (0, k).
    pub fn bhattacharyya_csv(&self) -> String {
        let mut out = String::from("view,variant,bhattacharyya\n");
        for (k, row) in self.histograms.iter().enumerate() {
            for (v, h) in self.variants.iter().zip(row) {
                match h.bhattacharyya() {
                    Ok(c) => writeln!(out, "{k},{v},{c:.4}").unwrap(),
                    Err(_) => writeln!(out, "{k},{v},").unwrap(),
                }
            }
        }
        out
    }
}

/// Detects corners in view 0 and keeps the strongest `n_points` whose
/// plane points stay inside every view with the configured margin.
pub fn select_tracked_points(
    seq: &SimSequence,
    view0: &GrayImage,
    opts: &RecognitionOptions,
) -> Result<(Vec<Keypoint>, Vec<Vector2<f64>>)> {
    let pyr = build_pyramid(view0, 1, 1.2)?;
    let detected = detect_multiscale(&pyr, &opts.detector)?;
    let (w, h) = (seq.model.width() as f64, seq.model.height() as f64);
    let m = opts.border_margin;
    let pp = seq.model.principal_point();
    let mut kps = Vec::new();
    let mut world = Vec::new();
    for kp in detected {
        if kps.len() == opts.n_points {
            break;
        }
        let px = Vector2::new(kp.x, kp.y);
        if opts.start_radius.is_some_and(|r| (px - pp).norm() > r) {
            continue;
        }
        let Some(p) = seq.backproject(0, px) else {
            continue;
        };
        let inside = (0..seq.len()).all(|v| {
            seq.project_point(v, p)
                .is_some_and(|q| q.x >= m && q.y >= m && q.x <= w - 1.0 - m && q.y <= h - 1.0 - m)
        });
        if inside {
            kps.push(kp);
            world.push(p);
        }
    }
    if kps.len() < opts.n_points {
        return Err(Error::ModelDomain(format!(
            "only {} of {} keypoints stay visible through the sequence",
            kps.len(),
            opts.n_points
        )));
    }
    Ok((kps, world))
}

/// Detect once in view 0, track the plane points exactly, describe them in
/// every view and match each view against view 0 without a threshold.
/// Rates use all tracked points as the denominator.
pub fn run_recognition_experiment(
    seq: &SimSequence,
    variants: &[Variant],
    setup: &DescriptorSetup,
    opts: &RecognitionOptions,
) -> Result<RecognitionResult> {
    if variants.is_empty() {
        return Err(Error::invalid("recognition needs at least one variant"));
    }
    let views = seq.render_all()?;
    let (keypoints, world) = select_tracked_points(seq, &views[0], opts)?;
    let tracks = visible_tracks(seq, &world)?;
    let n = world.len();
    let gt = GroundTruth {
        pairs: (0..n).map(|i| (i, i)).collect(),
        radius: 0.0,
    };

    let mut rates = vec![Vec::new(); seq.len()];
    let mut histograms = vec![Vec::new(); seq.len()];
    let radius = opts.detector.orientation_radius;
    let view_kps: Vec<Vec<Keypoint>> = views
        .iter()
        .zip(&tracks)
        .map(|(img, track)| {
            let mut kps = keypoints_at(track);
            if opts.oriented {
                for kp in &mut kps {
                    kp.angle = orientation_centroid(img, kp, radius);
                }
            }
            kps
        })
        .collect();
    let setup = DescriptorSetup {
        tests: setup.tests.clone(),
        options: ExtractOptions {
            use_orientation: opts.oriented,
            ..setup.options.clone()
        },
    };
    for &variant in variants {
        let ex = setup.extractor(variant, seq)?;
        let descs: Vec<Vec<BinaryDescriptor>> = views
            .par_iter()
            .enumerate()
            .map(|(v, img)| describe_all(&ex, img, &view_kps[v], v))
            .collect::<Result<_>>()?;
        let match_opts = MatchOptions {
            masked: variant.is_masked(),
            ..Default::default()
        };
        for (v, d) in descs.iter().enumerate() {
            let matches = match_brute_force(d, &descs[0], &match_opts)?;
            let correct = matches.iter().filter(|m| m.index_i == m.index_j).count();
            rates[v].push(correct as f64 / n as f64);
            histograms[v].push(distance_histograms(&descs[0], d, &gt, variant.is_masked())?);
        }
    }
    Ok(RecognitionResult {
        variants: variants.to_vec(),
        keypoints,
        rates,
        histograms,
    })
}
