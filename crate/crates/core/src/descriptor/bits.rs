use crate::error::{Error, Result};

/// Packed `D`-bit binary descriptor with an optional stability mask.
///
/// Bit `d` is the outcome of test `d`, stored LSB-first in 64-bit words.
/// Padding bits beyond `dim` are always zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryDescriptor {
    bits: Vec<u64>,
    dim: usize,
    mask: Option<Vec<u64>>,
    mask_ones: u32,
}

#[inline]
fn words_for(dim: usize) -> usize {
    dim.div_ceil(64)
}

impl BinaryDescriptor {
    pub fn zeros(dim: usize) -> Self {
        Self {
            bits: vec![0; words_for(dim)],
            dim,
            mask: None,
            mask_ones: 0,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut d = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            d.set_bit(i, b);
        }
        d
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    #[inline]
    pub fn bit(&self, d: usize) -> bool {
        debug_assert!(d < self.dim);
        (self.bits[d / 64] >> (d % 64)) & 1 == 1
    }

    #[inline]
    pub fn set_bit(&mut self, d: usize, value: bool) {
        assert!(
            d < self.dim,
            "bit {d} out of range for dimension {}",
            self.dim
        );
        let w = &mut self.bits[d / 64];
        if value {
            *w |= 1 << (d % 64);
        } else {
            *w &= !(1 << (d % 64));
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.iter().map(|w| w.count_ones()).sum()
    }

    /// Bitwise complement within `dim` (mask dropped).
    pub fn complement(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for (o, w) in out.bits.iter_mut().zip(&self.bits) {
            *o = !w;
        }
        out.clear_padding();
        out
    }

    fn clear_padding(&mut self) {
        let rem = self.dim % 64;
        if rem != 0 {
            if let Some(last) = self.bits.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn mask(&self) -> Option<&[u64]> {
        self.mask.as_deref()
    }

    #[inline]
    pub fn mask_ones(&self) -> u32 {
        self.mask_ones
    }

    pub fn has_mask(&self) -> bool {
        self.mask.is_some()
    }

    /// Attaches a stability mask given as a descriptor of the same dimension.
    pub fn with_mask(mut self, mask: &BinaryDescriptor) -> Result<Self> {
        if mask.dim != self.dim {
            return Err(Error::DimensionMismatch(self.dim, mask.dim));
        }
        let ones = mask.count_ones();
        if ones == 0 {
            return Err(Error::invalid("stability mask must keep at least one test"));
        }
        self.mask = Some(mask.bits.clone());
        self.mask_ones = ones;
        Ok(self)
    }

    pub fn without_mask(&self) -> Self {
        Self {
            bits: self.bits.clone(),
            dim: self.dim,
            mask: None,
            mask_ones: 0,
        }
    }

    /// Little-endian byte form: bit 0 is the LSB of byte 0; `ceil(D/8)` bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        words_to_bytes(&self.bits, self.dim)
    }

    pub fn mask_bytes(&self) -> Option<Vec<u8>> {
        self.mask.as_ref().map(|m| words_to_bytes(m, self.dim))
    }

    pub fn from_bytes(bytes: &[u8], dim: usize) -> Result<Self> {
        Ok(Self {
            bits: bytes_to_words(bytes, dim)?,
            dim,
            mask: None,
            mask_ones: 0,
        })
    }
}

fn words_to_bytes(words: &[u64], dim: usize) -> Vec<u8> {
    let n = dim.div_ceil(8);
    words.iter().flat_map(|w| w.to_le_bytes()).take(n).collect()
}

fn bytes_to_words(bytes: &[u8], dim: usize) -> Result<Vec<u64>> {
    if bytes.len() != dim.div_ceil(8) {
        return Err(Error::DimensionMismatch(bytes.len() * 8, dim));
    }
    let mut words = vec![0u64; words_for(dim)];
    for (i, &b) in bytes.iter().enumerate() {
        words[i / 8] |= (b as u64) << (8 * (i % 8));
    }
    let rem = dim % 64;
    if rem != 0 && words.last().is_some_and(|w| w >> rem != 0) {
        return Err(Error::invalid("descriptor padding bits must be zero"));
    }
    Ok(words)
}
