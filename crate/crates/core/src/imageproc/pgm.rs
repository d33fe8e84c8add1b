//! Binary 8-bit PGM (P5) codec.

use std::fs;
use std::path::Path;

use super::GrayImage;
use crate::error::{Error, Result};

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    decode_pgm(&bytes).map_err(|e| match e {
        Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
        other => other,
    })
}

pub fn write_pgm(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos).ok_or_else(|| pgm_err("missing magic number"))?;
    if magic != b"P5" {
        return Err(pgm_err("not a binary PGM (expected P5)"));
    }
    let width = header_number(bytes, &mut pos, "width")?;
    let height = header_number(bytes, &mut pos, "height")?;
    let maxval = header_number(bytes, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(pgm_err(format!(
            "unsupported maxval {maxval}, only 8-bit PGM is read"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(pgm_err("truncated header"));
    }
    pos += 1;
    let needed = width * height;
    let raster = &bytes[pos..];
    if raster.len() < needed {
        return Err(pgm_err(format!(
            "raster has {} bytes, expected {needed}",
            raster.len()
        )));
    }
    GrayImage::new(width, height, raster[..needed].to_vec())
}

fn pgm_err(message: impl Into<String>) -> Error {
    Error::parse("pgm", message)
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, pos).ok_or_else(|| pgm_err(format!("missing {what}")))?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| pgm_err(format!("invalid {what}")))
}

/// Next whitespace-delimited header token, skipping `#` comments.
fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| &bytes[start..*pos])
}
