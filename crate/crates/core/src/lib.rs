//! Distortion-aware binary descriptors (BRIEF, dBRIEF, mdBRIEF) for
//! calibrated wide-angle and fisheye cameras.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod descriptor;
pub mod detector;
pub mod error;
pub mod evaluation;
pub mod imageproc;
pub mod learning;
pub mod matching;
pub mod simulation;

pub use error::{Error, Result};
