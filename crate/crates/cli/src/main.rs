//! `mdbrief` command-line pipelines.
//!
//! Exit codes: 0 success, 1 usage error, 2 unreadable or malformed input,
//! 3 runtime or camera-model error.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod timing;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mdbrief::descriptor::Variant;

#[derive(Parser, Debug)]
#[command(
    name = "mdbrief",
    version,
    about = "Distortion-aware binary descriptors"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "MDBRIEF_THREADS")]
    pub threads: Option<usize>,

    /// Print per-stage timings (microseconds) to stderr.
    #[arg(long, global = true, env = "MDBRIEF_TIMING")]
    pub timing: bool,

    /// Print progress information to stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Detect oriented multi-scale FAST keypoints in a PGM image.
    Detect(DetectArgs),
    /// Write a random Gaussian test set.
    RandomTests(RandomTestsArgs),
    /// Cut smoothed patches around keypoints into a learning corpus.
    ExtractPatches(ExtractPatchesArgs),
    /// Learn a decorrelated, high-variance test set from a patch corpus.
    LearnTests(LearnTestsArgs),
    /// Describe keypoints with one descriptor variant.
    Extract(ExtractArgs),
    /// Nearest-neighbour matching of two descriptor files.
    Match(MatchArgs),
    /// Precision/recall and distance histograms against a homography.
    Evaluate(EvaluateArgs),
    /// Run the planar-scene experiments.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
pub struct DetectArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Maximum number of keypoints kept.
    #[arg(long, default_value_t = 500)]
    pub n_target: usize,
    #[arg(long, default_value_t = 20)]
    pub fast_threshold: u8,
    /// Pyramid levels; fewer are used if the image is too small.
    #[arg(long, default_value_t = 8)]
    pub levels: usize,
    #[arg(long, default_value_t = 1.2)]
    pub scale_factor: f64,
}

#[derive(Args, Debug)]
pub struct RandomTestsArgs {
    #[arg(long, default_value_t = 32)]
    pub patch_size: usize,
    #[arg(long, default_value_t = 256)]
    pub dim: usize,
    #[arg(long, default_value_t = 0, env = "MDBRIEF_SEED")]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExtractPatchesArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub keypoints: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub patch_size: usize,
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct LearnTestsArgs {
    /// Corpus directory with a manifest and PGM patches.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Number of tests to select.
    #[arg(long, default_value_t = 256)]
    pub dim: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// CSV log of the correlation-threshold schedule.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Keep degenerate and very long candidate tests.
    #[arg(long)]
    pub unfiltered: bool,
    /// Apply tests unrotated instead of steering them by patch orientation.
    #[arg(long)]
    pub no_orientation: bool,
    /// Learn through this camera model; patches must carry keypoints.
    #[arg(long)]
    pub calib: Option<PathBuf>,
    #[arg(long, default_value_t = 1.2)]
    pub scale_factor: f64,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub keypoints: PathBuf,
    #[arg(long)]
    pub tests: PathBuf,
    /// Camera calibration; without one a centred pinhole is assumed.
    #[arg(long)]
    pub calib: Option<PathBuf>,
    #[arg(long, default_value = "mdbrief")]
    pub variant: Variant,
    #[arg(long)]
    pub no_orientation: bool,
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    /// Half-width of the mask-learning rotation range, degrees.
    #[arg(long, default_value_t = 20.0)]
    pub rot_magnitude: f64,
    #[arg(long, default_value_t = 1.2)]
    pub scale_factor: f64,
    #[arg(long, default_value_t = 0, env = "MDBRIEF_SEED")]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct MatchArgs {
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long)]
    pub train: PathBuf,
    /// Drop matches farther than this.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub cross_check: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Descriptors of the first image.
    #[arg(long)]
    pub desc_i: PathBuf,
    /// Descriptors of the second image.
    #[arg(long)]
    pub desc_j: PathBuf,
    /// Plane homography between the undistorted views (3 rows of 3).
    #[arg(long)]
    pub homography: PathBuf,
    #[arg(long)]
    pub calib: PathBuf,
    /// Ground-truth radius in pixels.
    #[arg(long, default_value_t = 3.0)]
    pub radius: f64,
    /// Largest threshold of the sweep (default: D, or 2 for masked).
    #[arg(long)]
    pub threshold_max: Option<f64>,
    #[arg(long, default_value_t = 64)]
    pub threshold_steps: usize,
    /// PR curve CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Matching / non-matching distance histograms CSV.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// `key = value` experiment configuration.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in setup: pinhole, radial or fisheye.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, env = "MDBRIEF_SEED")]
    pub seed: Option<u64>,
    /// Run only the Hamming-distance evolution.
    #[arg(long, conflicts_with = "recognition_only")]
    pub evolution_only: bool,
    /// Run only the recognition experiment.
    #[arg(long)]
    pub recognition_only: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
