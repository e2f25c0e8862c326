//! GF(2) polar transform, code parameter sets and the two encoding steps of
//! the double-polar transmitter (source compression, then channel encoding).
//!
//! All index sets are stored 0-based. The JSON form of a code spec uses
//! 1-based indices, as does every human-facing printout.

mod construct;
mod spec;

pub use construct::{
    construct_channel_code, construct_source_code, esn0_from_ebn0, ga_check_node, ga_mean_llrs,
    ga_phi_ln, source_initial_mean,
};
pub use spec::{ChannelCodeSpec, CodeSpecDoc, SourceCodeSpec};

use crate::bits::BitBlock;
use crate::error::{invalid, Result};

/// Computes `u · F^{⊗n}` in place, natural (non bit-reversed) order.
///
/// `F = [[1, 0], [1, 1]]`, so each butterfly maps `(a, b)` to `(a ⊕ b, b)`.
/// Panics if the length is not a power of two.
pub fn polar_transform_in_place(bits: &mut [u8]) {
    let n = bits.len();
    assert!(n.is_power_of_two(), "polar transform length {} is not a power of two", n);
    let mut half = 1;
    while half < n {
        for block in bits.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

/// Returns `u · F^{⊗n}` for a block whose length is a power of two.
pub fn polar_transform(u: &[u8]) -> Result<BitBlock> {
    if u.is_empty() || !u.len().is_power_of_two() {
        return invalid(format!("polar transform length {} is not a power of two", u.len()));
    }
    let mut out = BitBlock::new(u.to_vec())?.into_vec();
    polar_transform_in_place(&mut out);
    BitBlock::new(out)
}

/// Source encoding: `c = s · G_{N_s}`, returns `c_H` in increasing index order.
pub fn compress_source(s: &BitBlock, spec: &SourceCodeSpec) -> Result<BitBlock> {
    if s.len() != spec.len() {
        return invalid(format!("source word has length {}, code expects {}", s.len(), spec.len()));
    }
    let c = polar_transform(s)?;
    c.select(spec.high_entropy())
}

/// Output of [`channel_encode`]: the assembled input word and the codeword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelEncoding {
    pub u: BitBlock,
    pub x: BitBlock,
}

/// Channel encoding: `u_A = c_H`, `u_{A^c}` = frozen values, `x = u · G_{N_c}`.
pub fn channel_encode(c_h: &BitBlock, spec: &ChannelCodeSpec) -> Result<ChannelEncoding> {
    if c_h.len() != spec.k() {
        return invalid(format!(
            "compressed word has length {}, channel code carries K = {}",
            c_h.len(),
            spec.k()
        ));
    }
    let mut u = vec![0u8; spec.len()];
    for (&pos, &bit) in spec.info().iter().zip(c_h.iter()) {
        u[pos] = bit;
    }
    for (&pos, &bit) in spec.frozen_positions().iter().zip(spec.frozen_values()) {
        u[pos] = bit;
    }
    let mut x = u.clone();
    polar_transform_in_place(&mut x);
    Ok(ChannelEncoding { u: BitBlock::new(u)?, x: BitBlock::new(x)? })
}

/// The full D-Polar transmitter: compress `s`, then channel-encode `c_H`.
pub fn dpolar_encode(
    s: &BitBlock,
    source: &SourceCodeSpec,
    channel: &ChannelCodeSpec,
) -> Result<BitBlock> {
    let c_h = compress_source(s, source)?;
    Ok(channel_encode(&c_h, channel)?.x)
}
