//! Ground truth from homographies, recognition rate, precision/recall and
//! distance-distribution overlap.

mod homography;
mod metrics;

pub use homography::{
    format_homography, parse_homography, project_keypoints, read_homography, Homography,
};
pub use metrics::{
    bhattacharyya, build_ground_truth, distance_histograms, format_pr_csv, mean_pr_curve, pr_curve,
    recognition_rate, recognition_rate_over, DistanceHistograms, GroundTruth, PrPoint,
};
