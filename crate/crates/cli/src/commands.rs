use std::fs;
use std::path::Path;

use nalgebra::Vector2;

use mdbrief::camera::{read_calibration, CameraModel};
use mdbrief::descriptor::{
    read_descriptors, read_test_set, write_descriptors, write_test_set, BinaryDescriptor,
    ExtractOptions, Extractor, TestSet,
};
use mdbrief::detector::{
    detect_multiscale, read_keypoints, write_keypoints, DetectorConfig, Keypoint,
};
use mdbrief::evaluation::{
    build_ground_truth, distance_histograms, format_pr_csv, pr_curve, read_homography,
    recognition_rate,
};
use mdbrief::imageproc::{build_pyramid, gaussian_smooth, read_pgm, MIN_LEVEL_SIZE};
use mdbrief::learning::{
    compute_variances, enumerate_candidate_tests, greedy_select, read_corpus, write_corpus,
    LearnOptions, PatchCorpus,
};
use mdbrief::matching::{match_brute_force, write_matches, MatchOptions};
use mdbrief::simulation::{hamming_evolution, run_recognition_experiment, LensPreset, SimConfig};
use mdbrief::Error;

use crate::timing::Timings;
use crate::{Cli, Command};

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_input_error() { 2 } else { 3 },
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

/// Reads an input file, naming it in the error.
fn input<T>(path: &Path, read: impl FnOnce(&Path) -> mdbrief::Result<T>) -> CliResult<T> {
    read(path).map_err(|e| {
        let io = matches!(e, Error::Io(_));
        let mut err = CliError::from(e);
        if io {
            err.message = format!("{}: {}", path.display(), err.message);
        }
        err
    })
}

fn output(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult {
    fs::write(path, bytes).map_err(|e| CliError {
        code: 3,
        message: format!("{}: {e}", path.display()),
    })
}

pub fn run(cli: &Cli) -> CliResult {
    let mut t = Timings::new(cli.timing);
    let verbose = cli.verbose;
    match &cli.command {
        Command::Detect(a) => detect(a, &mut t, verbose)?,
        Command::RandomTests(a) => {
            let q = TestSet::random_gaussian(a.patch_size, a.dim, a.seed)?;
            write_test_set(&a.out, &q)?;
        }
        Command::ExtractPatches(a) => extract_patches(a, &mut t, verbose)?,
        Command::LearnTests(a) => learn_tests(a, &mut t, verbose)?,
        Command::Extract(a) => extract(a, &mut t, verbose)?,
        Command::Match(a) => match_files(a, &mut t, verbose)?,
        Command::Evaluate(a) => evaluate(a, &mut t)?,
        Command::Simulate(a) => simulate(a, &mut t, verbose)?,
    }
    t.report();
    Ok(())
}

fn detect(a: &crate::DetectArgs, t: &mut Timings, verbose: bool) -> CliResult {
    let img = input(&a.image, |p| read_pgm(p))?;
    if a.n_target == 0 || a.levels == 0 {
        return Err(CliError::usage(
            "--n-target and --levels must be at least 1",
        ));
    }
    if !(a.scale_factor > 1.0) {
        return Err(CliError::usage("--scale-factor must exceed 1"));
    }
    let mut levels = 1;
    while levels < a.levels {
        let s = a.scale_factor.powi(levels as i32);
        if (img.width() as f64 / s) < MIN_LEVEL_SIZE as f64
            || (img.height() as f64 / s) < MIN_LEVEL_SIZE as f64
        {
            break;
        }
        levels += 1;
    }
    let pyr = t.stage("pyramid", None, || {
        build_pyramid(&img, levels, a.scale_factor)
    })?;
    let cfg = DetectorConfig {
        n_target: a.n_target,
        threshold: a.fast_threshold,
        ..Default::default()
    };
    let kps = t.stage("detect", None, || detect_multiscale(&pyr, &cfg))?;
    if verbose {
        eprintln!("{} keypoints on {levels} levels", kps.len());
    }
    write_keypoints(&a.out, &kps)?;
    Ok(())
}

fn extract_patches(a: &crate::ExtractPatchesArgs, t: &mut Timings, verbose: bool) -> CliResult {
    let img = input(&a.image, |p| read_pgm(p))?;
    let kps = input(&a.keypoints, |p| read_keypoints(p))?;
    let smoothed = t.stage("smooth", None, || {
        if a.sigma > 0.0 {
            gaussian_smooth(&img, a.sigma)
        } else {
            Ok(img.clone())
        }
    })?;
    let source = a
        .image
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let corpus = PatchCorpus::from_image(&smoothed, &kps, a.patch_size, source)?;
    if verbose {
        eprintln!(
            "{} of {} keypoints yield a full patch",
            corpus.len(),
            kps.len()
        );
    }
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError {
        code: 3,
        message: format!("{}: {e}", a.out_dir.display()),
    })?;
    write_corpus(&a.out_dir, &corpus)?;
    Ok(())
}

fn learn_tests(a: &crate::LearnTestsArgs, t: &mut Timings, verbose: bool) -> CliResult {
    let corpus = input(&a.corpus, |p| read_corpus(p))?;
    let model = a
        .calib
        .as_deref()
        .map(|p| input(p, |p| read_calibration(p)))
        .transpose()?;
    let opts = LearnOptions {
        rotate_with_orientation: !a.no_orientation,
        geometry: model.map(|m| (m, a.scale_factor)),
    };
    let candidates = t.stage("enumerate", None, || {
        enumerate_candidate_tests(corpus.patch_size(), !a.unfiltered)
    })?;
    let stats = t.stage("variances", Some(candidates.dim()), || {
        compute_variances(&corpus, &candidates, &opts)
    })?;
    if verbose {
        eprintln!("{} candidates over {} patches", stats.len(), corpus.len());
    }
    let selection = t.stage("select", None, || {
        greedy_select(&stats, &corpus, a.dim, &opts)
    });
    match selection {
        Ok(sel) => {
            write_test_set(&a.out, &sel.tests)?;
            if let Some(log) = &a.log {
                output(log, sel.log_csv())?;
            }
            if verbose {
                eprintln!(
                    "{} tests admitted at t_c = {:.1}",
                    sel.admitted.len(),
                    sel.final_threshold
                );
            }
            Ok(())
        }
        Err(e @ Error::TargetUnreachable { achieved, target }) => {
            if let Some(log) = &a.log {
                output(
                    log,
                    format!("pass,t_c,admitted\n# unreachable: achieved {achieved} of {target}\n"),
                )?;
            }
            Err(e.into())
        }
        Err(e) => Err(e.into()),
    }
}

/// Centred pinhole with lambda equal to the larger image side.
fn default_model(width: usize, height: usize) -> mdbrief::Result<CameraModel> {
    CameraModel::pinhole(
        width.max(height) as f64,
        Vector2::new((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0),
        width,
        height,
    )
}

fn extract(a: &crate::ExtractArgs, t: &mut Timings, verbose: bool) -> CliResult {
    let img = input(&a.image, |p| read_pgm(p))?;
    let kps = input(&a.keypoints, |p| read_keypoints(p))?;
    let tests = input(&a.tests, |p| read_test_set(p))?;
    let model = match &a.calib {
        Some(p) => input(p, |p| read_calibration(p))?,
        None => default_model(img.width(), img.height())?,
    };
    if !(a.rot_magnitude >= 0.0 && a.rot_magnitude.is_finite()) {
        return Err(CliError::usage(
            "--rot-magnitude must be a non-negative angle in degrees",
        ));
    }
    let opts = ExtractOptions {
        use_orientation: !a.no_orientation,
        smooth_sigma: a.sigma,
        scale_factor: a.scale_factor,
        rot_magnitude: a.rot_magnitude.to_radians(),
        seed: a.seed,
    };
    let ex = Extractor::new(a.variant, tests, &model, opts)?;
    let smoothed = t.stage("smooth", None, || ex.smooth(&img))?;
    let out = t.stage("describe", Some(kps.len()), || {
        ex.extract_smoothed(&smoothed, &kps)
    })?;
    if verbose {
        eprintln!(
            "{} described, {} skipped",
            out.described.len(),
            out.skipped.len()
        );
        for s in &out.skipped {
            eprintln!("  keypoint {}: {}", s.index, s.reason);
        }
    }
    let records: Vec<(Keypoint, BinaryDescriptor)> = out
        .described
        .into_iter()
        .map(|d| (d.keypoint, d.descriptor))
        .collect();
    write_descriptors(&a.out, &records)?;
    Ok(())
}

fn descriptors_only(
    records: Vec<(Keypoint, BinaryDescriptor)>,
) -> (Vec<Keypoint>, Vec<BinaryDescriptor>) {
    records.into_iter().unzip()
}

/// Whether a descriptor set is masked; mixed sets and masked-vs-plain
/// pairs are rejected with an explanation.
fn masked_pair(
    a: &[BinaryDescriptor],
    b: &[BinaryDescriptor],
    names: (&Path, &Path),
) -> CliResult<bool> {
    let kind = |set: &[BinaryDescriptor], name: &Path| -> CliResult<Option<bool>> {
        let masked = set.iter().filter(|d| d.mask().is_some()).count();
        match masked {
            0 if set.is_empty() => Ok(None),
            0 => Ok(Some(false)),
            m if m == set.len() => Ok(Some(true)),
            _ => Err(CliError {
                code: 2,
                message: format!(
                    "{}: file mixes masked and unmasked descriptors",
                    name.display()
                ),
            }),
        }
    };
    match (kind(a, names.0)?, kind(b, names.1)?) {
        (Some(x), Some(y)) if x != y => {
            let (masked, plain) = if x { names } else { (names.1, names.0) };
            Err(CliError {
                code: 3,
                message: format!(
                    "{} holds masked descriptors but {} does not; match descriptors of the same variant",
                    masked.display(),
                    plain.display()
                ),
            })
        }
        (x, y) => Ok(x.or(y).unwrap_or(false)),
    }
}

fn match_files(a: &crate::MatchArgs, t: &mut Timings, verbose: bool) -> CliResult {
    let (_, query) = descriptors_only(input(&a.query, |p| read_descriptors(p))?);
    let (_, train) = descriptors_only(input(&a.train, |p| read_descriptors(p))?);
    let masked = masked_pair(&query, &train, (&a.query, &a.train))?;
    let opts = MatchOptions {
        masked,
        threshold: a.threshold,
        cross_check: a.cross_check,
    };
    let matches = t.stage("match", Some(query.len()), || {
        match_brute_force(&query, &train, &opts)
    })?;
    if verbose {
        eprintln!("{} matches", matches.len());
    }
    write_matches(&a.out, &matches)?;
    Ok(())
}

fn evaluate(a: &crate::EvaluateArgs, t: &mut Timings) -> CliResult {
    let (kps_i, desc_i) = descriptors_only(input(&a.desc_i, |p| read_descriptors(p))?);
    let (kps_j, desc_j) = descriptors_only(input(&a.desc_j, |p| read_descriptors(p))?);
    let h = input(&a.homography, |p| read_homography(p))?;
    let model = input(&a.calib, |p| read_calibration(p))?;
    let masked = masked_pair(&desc_i, &desc_j, (&a.desc_i, &a.desc_j))?;
    if a.threshold_steps == 0 {
        return Err(CliError::usage("--threshold-steps must be at least 1"));
    }
    let gt = t.stage("ground truth", None, || {
        build_ground_truth(&kps_i, &kps_j, &model, &h, a.radius)
    })?;
    if gt.is_empty() {
        return Err(CliError {
            code: 3,
            message: "no ground-truth correspondences within the radius".into(),
        });
    }
    let dim = desc_i.first().map_or(0, |d| d.dim());
    let max = a
        .threshold_max
        .unwrap_or(if masked { 2.0 } else { dim as f64 });
    if !(max >= 0.0 && max.is_finite()) {
        return Err(CliError::usage(
            "--threshold-max must be finite and non-negative",
        ));
    }
    let thresholds: Vec<f64> = (0..=a.threshold_steps)
        .map(|k| max * k as f64 / a.threshold_steps as f64)
        .collect();
    let curve = t.stage("pr curve", None, || {
        pr_curve(&desc_i, &desc_j, &gt, &thresholds, masked)
    })?;
    output(&a.out, format_pr_csv(&curve))?;
    if let Some(path) = &a.histogram {
        let hist = t.stage("histograms", None, || {
            distance_histograms(&desc_i, &desc_j, &gt, masked)
        })?;
        output(path, hist.to_csv())?;
    }
    let all = match_brute_force(
        &desc_i,
        &desc_j,
        &MatchOptions {
            masked,
            ..Default::default()
        },
    )?;
    println!("correspondences {}", gt.len());
    println!("recognition_rate {:.4}", recognition_rate(&all, &gt)?);
    Ok(())
}

fn simulate(a: &crate::SimulateArgs, t: &mut Timings, verbose: bool) -> CliResult {
    let mut cfg = match (&a.config, &a.preset) {
        (Some(path), _) => {
            let text = input(path, |p| Ok(fs::read_to_string(p)?))?;
            let base = path.parent().unwrap_or(Path::new("."));
            input(path, |_| SimConfig::parse(&text, base))?
        }
        (None, Some(name)) => {
            SimConfig::preset(LensPreset::parse(name).map_err(|e| CliError::usage(e.to_string()))?)
        }
        (None, None) => return Err(CliError::usage("simulate needs --config or --preset")),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    // Fail fast: every referenced input is loaded before rendering starts.
    let texture = t.stage("texture", None, || cfg.plane_texture())?;
    let setup = cfg.descriptor_setup()?;
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError {
        code: 3,
        message: format!("{}: {e}", a.out_dir.display()),
    })?;

    if !a.recognition_only {
        let seq = cfg.evolution_sequence(texture.clone())?;
        let table = t.stage("evolution", Some(seq.len()), || {
            hamming_evolution(&seq, &cfg.evolution_points, &cfg.variants, &setup)
        })?;
        output(&a.out_dir.join("evolution.csv"), table.to_csv())?;
        if verbose {
            for &v in &cfg.variants {
                eprintln!(
                    "final distance {v}: {:.1}",
                    table.final_distance(v).unwrap_or(f64::NAN)
                );
            }
        }
    }
    if !a.evolution_only {
        let seq = cfg.recognition_sequence(texture)?;
        let opts = cfg.recognition_options();
        let res = t.stage("recognition", Some(seq.len()), || {
            run_recognition_experiment(&seq, &cfg.variants, &setup, &opts)
        })?;
        output(&a.out_dir.join("recognition_rates.csv"), res.rates_csv())?;
        output(
            &a.out_dir.join("bhattacharyya.csv"),
            res.bhattacharyya_csv(),
        )?;
        for (k, row) in res.histograms.iter().enumerate() {
            for (v, h) in cfg.variants.iter().zip(row) {
                output(
                    &a.out_dir.join(format!("histogram_view{k}_{v}.csv")),
                    h.to_csv(),
                )?;
            }
        }
        if verbose {
            for &v in &cfg.variants {
                eprintln!(
                    "final rate {v}: {:.3}",
                    res.final_rate(v).unwrap_or(f64::NAN)
                );
            }
        }
    }
    Ok(())
}
