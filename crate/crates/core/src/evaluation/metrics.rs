use std::collections::HashSet;
use std::fmt::Write as _;

use super::homography::{project_keypoints, Homography};
use crate::camera::CameraModel;
use crate::descriptor::BinaryDescriptor;
use crate::detector::Keypoint;
use crate::error::{Error, Result};
use crate::matching::{distance_matrix, match_brute_force, Match, MatchOptions};

/// Number of uniform bins used for masked distances on `[0, 2]`.
/// Reference correspondences `(index in image i, index in image j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub pairs: Vec<(usize, usize)>,
    pub radius: f64,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn set(&self) -> HashSet<(usize, usize)> {
        self.pairs.iter().copied().collect()
    }
}

/// Projects `kps_i` into image j and pairs each with a detection in
/// `kps_j` within `radius`. Assignment is global and greedy by ascending
/// distance (ties by source, then target index), so every source and every
/// target is used at most once.
pub fn build_ground_truth(
    kps_i: &[Keypoint],
    kps_j: &[Keypoint],
    model: &CameraModel,
    h: &Homography,
    radius: f64,
) -> Result<GroundTruth> {
    if !(radius > 0.0) {
        return Err(Error::invalid("ground-truth radius must be positive"));
    }
    let projected = project_keypoints(kps_i, model, h);
    let r2 = radius * radius;
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in projected.iter().enumerate() {
        let Some(p) = p else { continue };
        for (j, kp) in kps_j.iter().enumerate() {
            let d2 = (kp.x - p.x).powi(2) + (kp.y - p.y).powi(2);
            if d2 <= r2 {
                cand.push((d2, i, j));
            }
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_i = vec![false; kps_i.len()];
    let mut used_j = vec![false; kps_j.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in cand {
        if !used_i[i] && !used_j[j] {
            used_i[i] = true;
            used_j[j] = true;
            pairs.push((i, j));
        }
    }
    pairs.sort_unstable();
    Ok(GroundTruth { pairs, radius })
}

fn count_correct(matches: &[Match], gt: &HashSet<(usize, usize)>) -> usize {
    matches
        .iter()
        .filter(|m| gt.contains(&(m.index_i, m.index_j)))
        .count()
}

/// Correct matches over the number of ground-truth correspondences.
pub fn recognition_rate(matches: &[Match], gt: &GroundTruth) -> Result<f64> {
    if gt.is_empty() {
        return Err(Error::invalid("ground truth is empty"));
    }
    recognition_rate_over(matches, gt, gt.len())
}

/// Correct matches over an explicit point count (for example all tracked
/// points, including ones without a correspondence).
pub fn recognition_rate_over(matches: &[Match], gt: &GroundTruth, n_points: usize) -> Result<f64> {
    if n_points == 0 {
        return Err(Error::invalid("recognition rate over zero points"));
    }
    Ok(count_correct(matches, &gt.set()) as f64 / n_points as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub one_minus_precision: f64,
    pub recall: f64,
}

/// Precision/recall for each threshold. Matching runs once; each threshold
/// keeps the nearest-neighbour matches with distance at most `t`.
/// Thresholds that keep no match produce no point.
pub fn pr_curve(
    desc_i: &[BinaryDescriptor],
    desc_j: &[BinaryDescriptor],
    gt: &GroundTruth,
    thresholds: &[f64],
    masked: bool,
) -> Result<Vec<PrPoint>> {
    if gt.is_empty() {
        return Err(Error::invalid("ground truth is empty"));
    }
    if thresholds.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid("thresholds must be ascending"));
    }
    let all = match_brute_force(
        desc_i,
        desc_j,
        &MatchOptions {
            masked,
            ..Default::default()
        },
    )?;
    let gt_set = gt.set();
    let mut out = Vec::new();
    for &t in thresholds {
        let kept: Vec<Match> = all.iter().copied().filter(|m| m.distance <= t).collect();
        if kept.is_empty() {
            continue;
        }
        let correct = count_correct(&kept, &gt_set) as f64;
        out.push(PrPoint {
            threshold: t,
            one_minus_precision: 1.0 - correct / kept.len() as f64,
            recall: correct / gt.len() as f64,
        });
    }
    Ok(out)
}

/// Pointwise mean over curves evaluated on the same threshold list; a
/// threshold is averaged over the curves that have a point for it.
pub fn mean_pr_curve(curves: &[Vec<PrPoint>]) -> Vec<PrPoint> {
    let mut thresholds: Vec<f64> = curves.iter().flatten().map(|p| p.threshold).collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    thresholds
        .into_iter()
        .map(|t| {
            let pts: Vec<&PrPoint> = curves
                .iter()
                .flatten()
                .filter(|p| p.threshold == t)
                .collect();
            let n = pts.len() as f64;
            PrPoint {
                threshold: t,
                one_minus_precision: pts.iter().map(|p| p.one_minus_precision).sum::<f64>() / n,
                recall: pts.iter().map(|p| p.recall).sum::<f64>() / n,
            }
        })
        .collect()
}

pub fn format_pr_csv(points: &[PrPoint]) -> String {
    let mut out = String::from("threshold,one_minus_precision,recall\n");
    for p in points {
        writeln!(
            out,
            "{},{:.6},{:.6}",
            p.threshold, p.one_minus_precision, p.recall
        )
        .unwrap();
    }
    out
}

/// Overlap `sum sqrt(p_k q_k)` of two normalized histograms.
pub fn bhattacharyya(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    for h in [p, q] {
        if h.iter().any(|v| !(*v >= 0.0)) || (h.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "histogram must be non-negative and sum to 1",
            ));
        }
    }
    Ok(p.iter()
        .zip(q)
        .map(|(a, b)| (a * b).sqrt())
        .sum::<f64>()
        .min(1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceHistograms {
    /// Lower edge of each bin.
    pub edges: Vec<f64>,
    pub matching: Vec<f64>,
    pub nonmatching: Vec<f64>,
}

impl DistanceHistograms {
    pub fn bhattacharyya(&self) -> Result<f64> {
        bhattacharyya(&self.matching, &self.nonmatching)
    }

    /// `bin,matching_freq,nonmatching_freq` with a Bhattacharyya footer
    /// when both histograms are populated.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin,matching_freq,nonmatching_freq\n");
        for k in 0..self.edges.len() {
            writeln!(
                out,
                "{},{:.6},{:.6}",
                self.edges[k], self.matching[k], self.nonmatching[k]
            )
            .unwrap();
        }
        if let Ok(c) = self.bhattacharyya() {
            writeln!(out, "# bhattacharyya = {c:.4}").unwrap();
        }
        out
    }
}

fn normalize(h: &mut [f64]) {
    let total: f64 = h.iter().sum();
    if total > 0.0 {
        h.iter_mut().for_each(|v| *v /= total);
    }
}

/// Relative frequencies of distances between ground-truth pairs (matching)
/// and all other cross pairs (non-matching). Plain distances use one bin per
/// integer `0..=D`; masked distances are scaled by D/2 onto the same bins.
/// An empty population yields an all-zero histogram.
pub fn distance_histograms(
    desc_i: &[BinaryDescriptor],
    desc_j: &[BinaryDescriptor],
    gt: &GroundTruth,
    masked: bool,
) -> Result<DistanceHistograms> {
    if gt.is_empty() {
        return Err(Error::invalid("ground truth is empty"));
    }
    if let Some(&(i, j)) = gt
        .pairs
        .iter()
        .find(|(i, j)| *i >= desc_i.len() || *j >= desc_j.len())
    {
        return Err(Error::invalid(format!(
            "ground-truth pair ({i}, {j}) out of range"
        )));
    }
    let dist = distance_matrix(desc_i, desc_j, masked)?;
    let dim = desc_i[0].dim();
    // Masked distances live on [0, 2]; scaling by D/2 puts them on the
    // same D+1 bins as plain Hamming distances.
    let scale = if masked { dim as f64 / 2.0 } else { 1.0 };
    let nbins = dim + 1;
    let edges = (0..nbins).map(|k| k as f64 / scale).collect();
    let bin = |d: f64| ((d * scale).floor() as usize).min(dim);
    let gt_set = gt.set();
    let mut matching = vec![0.0; nbins];
    let mut nonmatching = vec![0.0; nbins];
    for (i, row) in dist.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            if gt_set.contains(&(i, j)) {
                matching[bin(d)] += 1.0;
            } else {
                nonmatching[bin(d)] += 1.0;
            }
        }
    }
    normalize(&mut matching);
    normalize(&mut nonmatching);
    Ok(DistanceHistograms {
        edges,
        matching,
        nonmatching,
    })
}
