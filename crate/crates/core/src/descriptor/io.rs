use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::bits::BinaryDescriptor;
use super::testset::{TestPair, TestSet};
use crate::detector::Keypoint;
use crate::error::{Error, Result};

const TESTS_HEADER: &str = "dbrief-tests v1";
const DESC_MAGIC: &[u8; 4] = b"DBRF";
const DESC_VERSION: u8 = 1;

/// Text form of a test set. Endpoints must be integers.
pub fn format_test_set(q: &TestSet) -> Result<String> {
    let mut out = format!("{TESTS_HEADER}\nD={} S={}\n", q.dim(), q.patch_size());
    for (i, p) in q.pairs().iter().enumerate() {
        let coords = [p.a.x, p.a.y, p.b.x, p.b.y];
        if coords.iter().any(|c| c.fract() != 0.0) {
            return Err(Error::invalid(format!(
                "test {i} has non-integer endpoints"
            )));
        }
        writeln!(
            out,
            "{} {} {} {}",
            coords[0], coords[1], coords[2], coords[3]
        )
        .unwrap();
    }
    Ok(out)
}

pub fn parse_test_set(text: &str) -> Result<TestSet> {
    let err = |line: usize, msg: String| Error::parse("test set", format!("line {line}: {msg}"));
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, TESTS_HEADER)) => {}
        _ => return Err(err(1, format!("expected header `{TESTS_HEADER}`"))),
    }
    let Some((n, dims)) = lines.next() else {
        return Err(err(2, "missing `D=<dim> S=<patch_size>` line".into()));
    };
    let mut dim = None;
    let mut size = None;
    for field in dims.split_whitespace() {
        match field.split_once('=') {
            Some(("D", v)) => dim = v.parse::<usize>().ok(),
            Some(("S", v)) => size = v.parse::<usize>().ok(),
            _ => return Err(err(n, format!("unexpected field `{field}`"))),
        }
    }
    let (Some(dim), Some(size)) = (dim, size) else {
        return Err(err(n, "expected `D=<dim> S=<patch_size>`".into()));
    };
    let mut pairs = Vec::with_capacity(dim);
    for (n, line) in lines {
        let v: Vec<i64> = line
            .split_whitespace()
            .map(|s| s.parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err(n, "expected four integers".into()))?;
        if v.len() != 4 {
            return Err(err(n, "expected four integers".into()));
        }
        pairs.push(TestPair::new(
            v[0] as f64,
            v[1] as f64,
            v[2] as f64,
            v[3] as f64,
        ));
    }
    if pairs.len() != dim {
        return Err(Error::parse(
            "test set",
            format!("header declares {dim} tests, found {}", pairs.len()),
        ));
    }
    TestSet::new(pairs, size).map_err(|e| Error::parse("test set", e.to_string()))
}

pub fn write_test_set(path: impl AsRef<Path>, q: &TestSet) -> Result<()> {
    fs::write(path, format_test_set(q)?)?;
    Ok(())
}

pub fn read_test_set(path: impl AsRef<Path>) -> Result<TestSet> {
    let path = path.as_ref();
    parse_test_set(&fs::read_to_string(path)?).map_err(|e| relabel(e, path))
}

fn relabel(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
        other => other,
    }
}

/// Binary descriptor file: `DBRF`, version, count, dimension, then per
/// record the keypoint (five LE f32), descriptor bytes, a mask flag and the
/// mask bytes if present.
pub fn encode_descriptors(records: &[(Keypoint, BinaryDescriptor)]) -> Result<Vec<u8>> {
    let dim = records.first().map_or(0, |(_, d)| d.dim());
    if dim > u16::MAX as usize {
        return Err(Error::invalid(format!(
            "dimension {dim} does not fit the file format"
        )));
    }
    let count = u32::try_from(records.len()).map_err(|_| Error::invalid("too many descriptors"))?;
    let nbytes = dim.div_ceil(8);
    let mut out = Vec::with_capacity(11 + records.len() * (21 + 2 * nbytes));
    out.extend_from_slice(DESC_MAGIC);
    out.push(DESC_VERSION);
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&(dim as u16).to_le_bytes());
    for (kp, d) in records {
        if d.dim() != dim {
            return Err(Error::DimensionMismatch(dim, d.dim()));
        }
        for v in [kp.x, kp.y, kp.angle, kp.octave as f64, kp.score] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        out.extend_from_slice(&d.to_bytes());
        match d.mask_bytes() {
            Some(m) => {
                out.push(1);
                out.extend_from_slice(&m);
            }
            None => out.push(0),
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| {
                Error::parse("descriptors", format!("truncated at byte {}", self.pos))
            })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode_descriptors(bytes: &[u8]) -> Result<Vec<(Keypoint, BinaryDescriptor)>> {
    let bad = |msg: String| Error::parse("descriptors", msg);
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != DESC_MAGIC {
        return Err(bad("bad magic, expected `DBRF`".into()));
    }
    let version = r.take(1)?[0];
    if version != DESC_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let count = u32::from_le_bytes(r.take(4)?.try_into().unwrap()) as usize;
    let dim = u16::from_le_bytes(r.take(2)?.try_into().unwrap()) as usize;
    let nbytes = dim.div_ceil(8);
    let mut out = Vec::with_capacity(count.min(bytes.len() / (21 + nbytes).max(1)));
    for i in 0..count {
        let mut f = [0f32; 5];
        for v in &mut f {
            *v = r.f32()?;
        }
        if f.iter().any(|v| !v.is_finite()) || f[3] < 0.0 || f[3].fract() != 0.0 {
            return Err(bad(format!("record {i}: invalid keypoint")));
        }
        let kp = Keypoint {
            x: f[0] as f64,
            y: f[1] as f64,
            angle: f[2] as f64,
            octave: f[3] as u32,
            score: f[4] as f64,
        };
        let mut desc = BinaryDescriptor::from_bytes(r.take(nbytes)?, dim)
            .map_err(|e| bad(format!("record {i}: {e}")))?;
        match r.take(1)?[0] {
            0 => {}
            1 => {
                let mask = BinaryDescriptor::from_bytes(r.take(nbytes)?, dim)
                    .map_err(|e| bad(format!("record {i}: {e}")))?;
                desc = desc
                    .with_mask(&mask)
                    .map_err(|e| bad(format!("record {i}: {e}")))?;
            }
            flag => return Err(bad(format!("record {i}: invalid mask flag {flag}"))),
        }
        out.push((kp, desc));
    }
    if r.pos != bytes.len() {
        return Err(bad(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(out)
}

pub fn write_descriptors(
    path: impl AsRef<Path>,
    records: &[(Keypoint, BinaryDescriptor)],
) -> Result<()> {
    fs::write(path, encode_descriptors(records)?)?;
    Ok(())
}

pub fn read_descriptors(path: impl AsRef<Path>) -> Result<Vec<(Keypoint, BinaryDescriptor)>> {
    let path = path.as_ref();
    decode_descriptors(&fs::read(path)?).map_err(|e| relabel(e, path))
}
