//! Line-oriented `key = value` calibration files.
//!
//! ```text
//! model = fisheye
//! poly_unproj = 180 -0.00185 0 -7.6e-8
//! stretch = 1 0 0 1
//! principal_point = 320 240
//! size = 640 480
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{Matrix2, Vector2};

use super::{CameraKind, CameraModel, FisheyeParams};
use crate::error::{Error, Result};

const KNOWN_KEYS: [&str; 8] = [
    "model",
    "lambda",
    "xi",
    "poly_unproj",
    "poly_forward",
    "stretch",
    "principal_point",
    "size",
];

pub fn read_calibration(path: impl AsRef<Path>) -> Result<CameraModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_calibration(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
        other => other,
    })
}

pub fn parse_calibration(text: &str) -> Result<CameraModel> {
    let mut entries: BTreeMap<&str, &str> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| calib_err(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(calib_err(format!(
                "line {}: unknown key `{key}`",
                lineno + 1
            )));
        }
        if entries.insert(key, value.trim()).is_some() {
            return Err(calib_err(format!(
                "line {}: duplicate key `{key}`",
                lineno + 1
            )));
        }
    }

    let model = *entries.get("model").ok_or_else(|| missing("model"))?;
    let allowed: &[&str] = match model {
        "pinhole" => &["model", "lambda", "principal_point", "size"],
        "radial" => &["model", "lambda", "xi", "principal_point", "size"],
        "fisheye" => &[
            "model",
            "lambda",
            "poly_unproj",
            "poly_forward",
            "stretch",
            "principal_point",
            "size",
        ],
        other => return Err(calib_err(format!("unknown model `{other}`"))),
    };
    if let Some(key) = entries.keys().find(|k| !allowed.contains(k)) {
        return Err(calib_err(format!(
            "key `{key}` does not apply to model `{model}`"
        )));
    }

    let pp = reals::<2>(&entries, "principal_point")?;
    let size = reals::<2>(&entries, "size")?;
    if size.iter().any(|s| *s < 1.0 || s.fract() != 0.0) {
        return Err(calib_err("size must be two positive integers"));
    }
    let principal_point = Vector2::new(pp[0], pp[1]);
    let (width, height) = (size[0] as usize, size[1] as usize);

    match model {
        "pinhole" => {
            let lambda = reals::<1>(&entries, "lambda")?[0];
            CameraModel::pinhole(lambda, principal_point, width, height)
        }
        "radial" => {
            let lambda = reals::<1>(&entries, "lambda")?[0];
            let xi = reals::<1>(&entries, "xi")?[0];
            CameraModel::pinhole_radial(lambda, xi, principal_point, width, height)
        }
        _ => {
            let poly = reals::<4>(&entries, "poly_unproj")?;
            let forward_poly = match entries.get("poly_forward") {
                Some(v) => Some(parse_list(v, "poly_forward")?),
                None => None,
            };
            let stretch = match entries.get("stretch") {
                Some(_) => {
                    let s = reals::<4>(&entries, "stretch")?;
                    Matrix2::new(s[0], s[1], s[2], s[3])
                }
                None => Matrix2::identity(),
            };
            if entries.contains_key("lambda") {
                let lambda = reals::<1>(&entries, "lambda")?[0];
                if lambda != poly[0] {
                    return Err(calib_err(format!(
                        "fisheye lambda must equal a0 ({}), got {lambda}",
                        poly[0]
                    )));
                }
            }
            let params = FisheyeParams {
                unproj_poly: poly,
                forward_poly,
                stretch,
            };
            CameraModel::fisheye(params, principal_point, width, height)
        }
    }
}

/// Serializes a model in the calibration file format. Floats use the
/// shortest representation that parses back to the same value.
pub fn write_calibration(model: &CameraModel) -> String {
    let mut out = String::new();
    let pp = model.principal_point();
    match model.kind() {
        CameraKind::Pinhole => {
            writeln!(out, "model = pinhole").unwrap();
            writeln!(out, "lambda = {}", model.lambda()).unwrap();
        }
        CameraKind::PinholeRadial { xi } => {
            writeln!(out, "model = radial").unwrap();
            writeln!(out, "lambda = {}", model.lambda()).unwrap();
            writeln!(out, "xi = {xi}").unwrap();
        }
        CameraKind::GenericFisheye(p) => {
            let [a0, a2, a3, a4] = p.unproj_poly;
            writeln!(out, "model = fisheye").unwrap();
            writeln!(out, "poly_unproj = {a0} {a2} {a3} {a4}").unwrap();
            if let Some(fwd) = &p.forward_poly {
                let coeffs: Vec<String> = fwd.iter().map(|c| c.to_string()).collect();
                writeln!(out, "poly_forward = {}", coeffs.join(" ")).unwrap();
            }
            let s = &p.stretch;
            writeln!(
                out,
                "stretch = {} {} {} {}",
                s[(0, 0)],
                s[(0, 1)],
                s[(1, 0)],
                s[(1, 1)]
            )
            .unwrap();
        }
    }
    writeln!(out, "principal_point = {} {}", pp.x, pp.y).unwrap();
    writeln!(out, "size = {} {}", model.width(), model.height()).unwrap();
    out
}

fn calib_err(message: impl Into<String>) -> Error {
    Error::parse("calibration", message)
}

fn missing(key: &str) -> Error {
    calib_err(format!("missing required key `{key}`"))
}

fn parse_list(value: &str, key: &str) -> Result<Vec<f64>> {
    value
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| calib_err(format!("`{key}`: invalid number `{t}`")))
        })
        .collect()
}

fn reals<const N: usize>(entries: &BTreeMap<&str, &str>, key: &str) -> Result<[f64; N]> {
    let value = entries.get(key).ok_or_else(|| missing(key))?;
    let list = parse_list(value, key)?;
    list.try_into()
        .map_err(|v: Vec<f64>| calib_err(format!("`{key}` expects {N} values, got {}", v.len())))
}
