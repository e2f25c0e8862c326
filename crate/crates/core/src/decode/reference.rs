//! Straightforward reference decoders for differential testing.
//!
//! Nothing here shares memory between paths: every path owns its decision
//! vectors, splitting deep-copies them, and every decision LLR is recomputed
//! from the stage-0 LLRs by recursion. Quadratic in the block length, so only
//! suitable for checking the production decoders.

use super::kernels::{decision_penalty, f_min_sum, f_op, g_op, saturate, CheckNode};
use crate::bits::BitBlock;
use crate::error::{invalid, Result};
use crate::polar::{polar_transform_in_place, ChannelCodeSpec, SourceCodeSpec};
use crate::trellis::{CompoundTrellis, NodeKind};

/// Decision LLR of leaf `decided.len()` of the tree rooted at `llrs`, given
/// the decisions already made on leaves `0..decided.len()`.
pub fn leaf_llr(llrs: &[f64], decided: &[u8], kernel: CheckNode) -> f64 {
    let n = llrs.len();
    assert!(decided.len() < n);
    if n == 1 {
        return llrs[0];
    }
    let half = n / 2;
    let (a, b) = llrs.split_at(half);
    if decided.len() < half {
        let child: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| match kernel {
                CheckNode::Exact => f_op(x, y),
                CheckNode::MinSum => f_min_sum(x, y),
            })
            .collect();
        leaf_llr(&child, decided, kernel)
    } else {
        let mut left = decided[..half].to_vec();
        polar_transform_in_place(&mut left);
        let child: Vec<f64> = a.iter().zip(b).zip(&left).map(|((&x, &y), &u)| g_op(x, y, u)).collect();
        leaf_llr(&child, &decided[half..], kernel)
    }
}

/// Classic recursive SC decoder: hard decision `û = 1` iff the LLR is negative.
pub fn sc_decode(channel_llrs: &[f64], channel: &ChannelCodeSpec) -> Result<BitBlock> {
    if channel_llrs.len() != channel.len() {
        return invalid("LLR length does not match the code");
    }
    let llrs: Vec<f64> = channel_llrs.iter().map(|&l| saturate(l)).collect();
    let layout = channel.layout();
    let mut u = Vec::with_capacity(channel.len());
    sc_node(&llrs, &layout, &mut u);
    BitBlock::new(u)
}

/// Decodes the subtree over `layout`, appending decisions to `u` and
/// returning the subtree's re-encoded bits.
fn sc_node(llrs: &[f64], layout: &[Option<u8>], u: &mut Vec<u8>) -> Vec<u8> {
    if llrs.len() == 1 {
        let bit = layout[0].unwrap_or(u8::from(llrs[0] < 0.0));
        u.push(bit);
        return vec![bit];
    }
    let half = llrs.len() / 2;
    let (a, b) = llrs.split_at(half);
    let left_llrs: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| f_op(x, y)).collect();
    let left = sc_node(&left_llrs, &layout[..half], u);
    let right_llrs: Vec<f64> = a.iter().zip(b).zip(&left).map(|((&x, &y), &v)| g_op(x, y, v)).collect();
    let right = sc_node(&right_llrs, &layout[half..], u);
    let mut out: Vec<u8> = left.iter().zip(&right).map(|(l, r)| l ^ r).collect();
    out.extend_from_slice(&right);
    out
}

#[derive(Clone)]
struct NaivePath {
    v: Vec<u8>,
    channel_bits: Vec<u8>,
    source_bits: Vec<u8>,
    jpm: f64,
    id: u64,
}

/// Joint SCL exactly as the level-by-level description reads, with full
/// path copies. Returns `(ŝ, final metric)`.
pub fn jscl_decode_naive(
    channel_llrs: &[f64],
    trellis: &CompoundTrellis,
    source: &SourceCodeSpec,
    list_size: usize,
    kernel: CheckNode,
) -> Result<(BitBlock, f64)> {
    if list_size == 0 {
        return invalid("list size must be at least 1");
    }
    let ch: Vec<f64> = channel_llrs.iter().map(|&l| saturate(l)).collect();
    let src = vec![saturate(source.prior_llr()); source.len()];
    let mut frozen = trellis.frozen_values().iter();
    let mut paths = vec![NaivePath {
        v: vec![],
        channel_bits: vec![],
        source_bits: vec![],
        jpm: 0.0,
        id: 0,
    }];
    let mut next_id = 1;
    for &kind in trellis.kinds() {
        match kind {
            NodeKind::Frozen => {
                let bit = *frozen.next().unwrap();
                for p in &mut paths {
                    let l = leaf_llr(&ch, &p.channel_bits, kernel);
                    p.jpm += decision_penalty(l, bit);
                    p.channel_bits.push(bit);
                    p.v.push(bit);
                }
            }
            NodeKind::Jsc | NodeKind::LowEntropy => {
                let joint = kind == NodeKind::Jsc;
                let mut next = Vec::with_capacity(2 * paths.len());
                for p in &paths {
                    let ls = leaf_llr(&src, &p.source_bits, kernel);
                    let lc = if joint { leaf_llr(&ch, &p.channel_bits, kernel) } else { 0.0 };
                    for bit in [0u8, 1] {
                        let mut q = p.clone();
                        if joint {
                            q.jpm += decision_penalty(lc, bit);
                            q.channel_bits.push(bit);
                        }
                        q.jpm += decision_penalty(ls, bit);
                        q.source_bits.push(bit);
                        q.v.push(bit);
                        if bit == 1 {
                            q.id = next_id;
                            next_id += 1;
                        }
                        next.push(q);
                    }
                }
                if next.len() > list_size {
                    let mut ranked: Vec<(f64, u64)> = next.iter().map(|q| (q.jpm, q.id)).collect();
                    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    let kept: Vec<u64> = ranked[..list_size].iter().map(|r| r.1).collect();
                    // survivors stay in parent order, as 1-extension ids depend on it
                    next.retain(|q| kept.contains(&q.id));
                }
                paths = next;
            }
        }
    }
    let best = paths
        .iter()
        .min_by(|a, b| a.jpm.total_cmp(&b.jpm).then(a.id.cmp(&b.id)))
        .unwrap();
    let mut s = best.source_bits.clone();
    polar_transform_in_place(&mut s);
    Ok((BitBlock::new(s)?, best.jpm))
}
