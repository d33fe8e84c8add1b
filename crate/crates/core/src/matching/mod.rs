//! Hamming and masked Hamming distances and brute-force matching.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::descriptor::BinaryDescriptor;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Match {
    pub index_i: usize,
    pub index_j: usize,
    /// Bits for plain Hamming, `[0, 2]` for masked distances.
    pub distance: f64,
}

/// Number of differing bits.
pub fn hamming(a: &BinaryDescriptor, b: &BinaryDescriptor) -> Result<u32> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(hamming_words(a.words(), b.words()))
}

#[inline]
fn hamming_words(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

/// Differing bits counted under each side's mask, each count normalized by
/// that mask's number of ones, then summed.
pub fn masked_hamming(a: &BinaryDescriptor, b: &BinaryDescriptor) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let (Some(la), Some(lb)) = (a.mask(), b.mask()) else {
        return Err(Error::MissingMask);
    };
    Ok(masked_words(
        a.words(),
        la,
        a.mask_ones(),
        b.words(),
        lb,
        b.mask_ones(),
    ))
}

#[inline]
fn masked_words(a: &[u64], la: &[u64], oa: u32, b: &[u64], lb: &[u64], ob: u32) -> f64 {
    let mut ca = 0u32;
    let mut cb = 0u32;
    for k in 0..a.len() {
        let x = a[k] ^ b[k];
        ca += (x & la[k]).count_ones();
        cb += (x & lb[k]).count_ones();
    }
    ca as f64 / oa as f64 + cb as f64 / ob as f64
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MatchOptions {
    pub masked: bool,
    /// Emit a match only if its distance is at most this; `None` accepts all.
    pub threshold: Option<f64>,
    pub cross_check: bool,
}

/// Validates a query/train pair of descriptor sets and returns the common
/// dimension.
fn check_sets(
    set_i: &[BinaryDescriptor],
    set_j: &[BinaryDescriptor],
    masked: bool,
) -> Result<usize> {
    let Some(first) = set_i.first().or(set_j.first()) else {
        return Ok(0);
    };
    let dim = first.dim();
    let with_mask = first.has_mask();
    for d in set_i.iter().chain(set_j) {
        if d.dim() != dim {
            return Err(Error::DimensionMismatch(dim, d.dim()));
        }
        if d.has_mask() != with_mask {
            return Err(Error::MixedMasks);
        }
    }
    if masked && !with_mask {
        return Err(Error::MissingMask);
    }
    Ok(dim)
}

/// Pairwise distance function for already validated sets.
fn distance_fn(masked: bool) -> impl Fn(&BinaryDescriptor, &BinaryDescriptor) -> f64 + Sync {
    move |a, b| {
        if masked {
            masked_words(
                a.words(),
                a.mask().unwrap(),
                a.mask_ones(),
                b.words(),
                b.mask().unwrap(),
                b.mask_ones(),
            )
        } else {
            hamming_words(a.words(), b.words()) as f64
        }
    }
}

/// Nearest neighbour in `targets` for `query`; ties go to the lowest index.
fn nearest(
    query: &BinaryDescriptor,
    targets: &[BinaryDescriptor],
    dist: &impl Fn(&BinaryDescriptor, &BinaryDescriptor) -> f64,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (j, t) in targets.iter().enumerate() {
        let d = dist(query, t);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((j, d));
        }
    }
    best
}

/// Nearest-neighbour matching of every descriptor in `set_i` against
/// `set_j`. Output is ordered by `index_i`.
pub fn match_brute_force(
    set_i: &[BinaryDescriptor],
    set_j: &[BinaryDescriptor],
    opts: &MatchOptions,
) -> Result<Vec<Match>> {
    check_sets(set_i, set_j, opts.masked)?;
    if set_i.is_empty() || set_j.is_empty() {
        return Ok(Vec::new());
    }
    let dist = distance_fn(opts.masked);
    let forward: Vec<(usize, f64)> = set_i
        .par_iter()
        .map(|q| nearest(q, set_j, &dist).expect("non-empty train set"))
        .collect();
    let backward: Option<Vec<usize>> = opts.cross_check.then(|| {
        set_j
            .par_iter()
            .map(|t| {
                nearest(t, set_i, &|a, b| dist(b, a))
                    .expect("non-empty query set")
                    .0
            })
            .collect()
    });

    Ok(forward
        .into_iter()
        .enumerate()
        .filter(|&(i, (j, d))| {
            opts.threshold.is_none_or(|t| d <= t) && backward.as_ref().is_none_or(|b| b[j] == i)
        })
        .map(|(index_i, (index_j, distance))| Match {
            index_i,
            index_j,
            distance,
        })
        .collect())
}

/// All `|set_i| x |set_j|` distances, row-major.
pub fn distance_matrix(
    set_i: &[BinaryDescriptor],
    set_j: &[BinaryDescriptor],
    masked: bool,
) -> Result<Vec<Vec<f64>>> {
    check_sets(set_i, set_j, masked)?;
    let dist = distance_fn(masked);
    Ok(set_i
        .par_iter()
        .map(|a| set_j.iter().map(|b| dist(a, b)).collect())
        .collect())
}

/// CSV form: `index_i,index_j,distance`.
pub fn format_matches(matches: &[Match]) -> String {
    let mut out = String::from("index_i,index_j,distance\n");
    for m in matches {
        writeln!(out, "{},{},{}", m.index_i, m.index_j, m.distance).unwrap();
    }
    out
}

pub fn parse_matches(text: &str) -> Result<Vec<Match>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("index_i,index_j,distance") {
        return Err(Error::parse(
            "matches",
            "expected header `index_i,index_j,distance`",
        ));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            let bad = || {
                Error::parse(
                    "matches",
                    format!("line {}: expected `i,j,distance`", n + 2),
                )
            };
            let f: Vec<&str> = l.trim().split(',').collect();
            if f.len() != 3 {
                return Err(bad());
            }
            Ok(Match {
                index_i: f[0].parse().map_err(|_| bad())?,
                index_j: f[1].parse().map_err(|_| bad())?,
                distance: f[2].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

pub fn write_matches(path: impl AsRef<Path>, matches: &[Match]) -> Result<()> {
    fs::write(path, format_matches(matches))?;
    Ok(())
}
