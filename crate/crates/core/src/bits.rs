//! Binary words over GF(2).

use std::fmt;
use std::ops::{BitXor, Deref};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A non-empty vector of bits, one `u8` per bit, every element 0 or 1.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct BitBlock(Vec<u8>);

impl BitBlock {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return invalid("bit block must not be empty");
        }
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return invalid(format!("bit {} has value {}, expected 0 or 1", pos, bits[pos]));
        }
        Ok(Self(bits))
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "bit block must not be empty");
        Self(vec![0; len])
    }

    /// Builds a block from any iterator of booleans.
    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Result<Self> {
        Self::new(bits.into_iter().map(u8::from).collect())
    }

    /// Unpacks the low `len` bits of `word`, least significant first.
    pub fn from_word(word: u64, len: usize) -> Self {
        assert!(len > 0 && len <= 64);
        Self((0..len).map(|k| ((word >> k) & 1) as u8).collect())
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().map(|&b| b as usize).sum()
    }

    /// Number of positions where `self` and `other` differ.
    pub fn hamming_distance(&self, other: &BitBlock) -> usize {
        assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// Gathers the bits at `indices` (0-based) in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<BitBlock> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return invalid(format!("index {} out of range for length {}", bad, self.len()));
        }
        BitBlock::new(indices.iter().map(|&i| self.0[i]).collect())
    }
}

impl Deref for BitBlock {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl TryFrom<Vec<u8>> for BitBlock {
    type Error = crate::Error;

    fn try_from(bits: Vec<u8>) -> Result<Self> {
        Self::new(bits)
    }
}

impl From<BitBlock> for Vec<u8> {
    fn from(b: BitBlock) -> Vec<u8> {
        b.0
    }
}

impl BitXor for &BitBlock {
    type Output = BitBlock;

    fn bitxor(self, rhs: &BitBlock) -> BitBlock {
        assert_eq!(self.len(), rhs.len(), "xor of blocks with different lengths");
        BitBlock(self.0.iter().zip(&rhs.0).map(|(a, b)| a ^ b).collect())
    }
}

impl fmt::Debug for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitBlock(")?;
        fmt::Display::fmt(self, f)?;
        write!(f, ")")
    }
}

impl fmt::Display for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}
