//! Successive-cancellation list decoders for D-Polar codes.
//!
//! - [`JointDecoder`]: joint SCL over the compound trellis. JSC levels use
//!   both channel and source decision LLRs, low-entropy levels only the
//!   source LLR, frozen levels only the channel LLR.
//! - [`ChannelDecoder`]: plain LLR-based SCL for the channel code.
//! - [`SourceDecoder`]: source SCL with the high-entropy bits known.
//! - [`SeparateDecoder`]: channel SCL followed by source SCL.
//!
//! Every decoder owns reusable scratch memory, so build one per worker and
//! call `decode` per frame. Pruning keeps the `L` extensions with the
//! smallest (metric, path id); a 0-extension inherits its parent's id and a
//! 1-extension gets a fresh, larger id.

mod kernels;
mod list;
pub mod reference;
mod stages;

pub use kernels::{
    decision_penalty, f_min_sum, f_op, g_op, phi_metric, phi_tilde_metric, saturate, softplus,
    CheckNode, LLR_CLAMP,
};
pub use list::{MetricTerms, TraceRecord};

use serde::{Deserialize, Serialize};

use crate::bits::BitBlock;
use crate::error::{invalid, Result};
use crate::polar::{polar_transform_in_place, ChannelCodeSpec, SourceCodeSpec};
use crate::trellis::{CompoundTrellis, LevelMap, NodeKind};
use list::{LevelReport, ListEngine, Step, Touch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderOptions {
    pub list_size: usize,
    #[serde(default)]
    pub check_node: CheckNode,
}

impl DecoderOptions {
    pub fn new(list_size: usize) -> Self {
        Self { list_size, check_node: CheckNode::Exact }
    }

    pub fn min_sum(mut self) -> Self {
        self.check_node = CheckNode::MinSum;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.list_size == 0 {
            return invalid("list size must be at least 1");
        }
        Ok(())
    }
}

fn saturate_into(buf: &mut Vec<f64>, llrs: &[f64]) {
    buf.clear();
    buf.extend(llrs.iter().map(|&l| saturate(l)));
}

/// Output of the joint decoder for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct JointOutput {
    pub s_hat: BitBlock,
    /// Estimated `c = s·G_{N_s}` (all `N_s` source-trellis decisions).
    pub c_hat: BitBlock,
    pub metric: f64,
    pub terms: MetricTerms,
}

/// Joint SCL decoder bound to one compound trellis.
pub struct JointDecoder {
    steps: Vec<Step>,
    kinds: Vec<NodeKind>,
    level_map: Vec<LevelMap>,
    channel_len: usize,
    source_prior: Vec<f64>,
    root: Vec<f64>,
    engine: ListEngine,
    options: DecoderOptions,
}

impl JointDecoder {
    pub fn new(
        trellis: &CompoundTrellis,
        source: &SourceCodeSpec,
        options: DecoderOptions,
    ) -> Result<Self> {
        options.validate()?;
        if trellis.source_len() != source.len() || trellis.jsc().len() != source.k() {
            return invalid("trellis does not match the source code");
        }
        let mut frozen = trellis.frozen_values().iter();
        let steps = trellis
            .kinds()
            .iter()
            .map(|kind| match kind {
                NodeKind::Jsc => Step::Split(Touch::BOTH),
                NodeKind::LowEntropy => Step::Split(Touch::SOURCE),
                NodeKind::Frozen => Step::Known(*frozen.next().unwrap(), Touch::CHANNEL),
            })
            .collect();
        let channel_len = trellis.channel_len();
        Ok(Self {
            steps,
            kinds: trellis.kinds().to_vec(),
            level_map: trellis.level_map().to_vec(),
            channel_len,
            source_prior: vec![saturate(source.prior_llr()); source.len()],
            root: Vec::with_capacity(channel_len),
            engine: ListEngine::new(
                Some(channel_len.trailing_zeros()),
                Some(source.log_len()),
            ),
            options,
        })
    }

    pub fn options(&self) -> DecoderOptions {
        self.options
    }

    pub fn decode(&mut self, channel_llrs: &[f64]) -> Result<JointOutput> {
        self.run(channel_llrs, None)
    }

    /// Decodes and records one [`TraceRecord`] per level.
    pub fn decode_traced(&mut self, channel_llrs: &[f64]) -> Result<(JointOutput, Vec<TraceRecord>)> {
        let mut trace = Vec::with_capacity(self.steps.len());
        let kinds = self.kinds.clone();
        let map = self.level_map.clone();
        let mut record = |r: LevelReport| {
            let level = r.level;
            trace.push(TraceRecord {
                phi: level + 1,
                kind: match kinds[level] {
                    NodeKind::Frozen => "Frozen",
                    NodeKind::Jsc => "JSC",
                    NodeKind::LowEntropy => "LowEntropy",
                },
                i_c: map[level].channel.map(|i| i + 1),
                i_s: map[level].source.map(|i| i + 1),
                surviving_jpms: r.survivors,
                parent_jpms: r.parents,
                candidate_jpms: r.candidates,
            })
        };
        let out = self.run(channel_llrs, Some(&mut record))?;
        Ok((out, trace))
    }

    fn run(
        &mut self,
        channel_llrs: &[f64],
        on_level: Option<&mut dyn FnMut(LevelReport)>,
    ) -> Result<JointOutput> {
        if channel_llrs.len() != self.channel_len {
            return invalid(format!(
                "{} channel LLRs supplied, code length is {}",
                channel_llrs.len(),
                self.channel_len
            ));
        }
        saturate_into(&mut self.root, channel_llrs);
        let out = self.engine.run(
            &self.steps,
            &self.root,
            &self.source_prior,
            self.options.list_size,
            self.options.check_node,
            on_level,
        )?;
        let c: Vec<u8> = out
            .decisions
            .iter()
            .zip(&self.level_map)
            .filter(|(_, m)| m.source.is_some())
            .map(|(&b, _)| b)
            .collect();
        let mut s = c.clone();
        polar_transform_in_place(&mut s);
        Ok(JointOutput {
            s_hat: BitBlock::new(s)?,
            c_hat: BitBlock::new(c)?,
            metric: out.metric,
            terms: out.terms,
        })
    }
}

/// One-shot joint decoding; see [`JointDecoder`].
pub fn jscl_decode(
    channel_llrs: &[f64],
    trellis: &CompoundTrellis,
    source: &SourceCodeSpec,
    options: DecoderOptions,
) -> Result<JointOutput> {
    JointDecoder::new(trellis, source, options)?.decode(channel_llrs)
}

/// Output of channel SCL decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOutput {
    /// Decoded `û_A`, the estimate of `c_H`.
    pub info: BitBlock,
    /// All `N_c` decoded input bits, frozen ones included.
    pub u_hat: BitBlock,
    pub metric: f64,
}

/// LLR-based SCL decoder for a channel polar code. With `L = 1` it makes
/// exactly the hard decisions of SC decoding.
pub struct ChannelDecoder {
    steps: Vec<Step>,
    info: Vec<usize>,
    root: Vec<f64>,
    engine: ListEngine,
    options: DecoderOptions,
}

impl ChannelDecoder {
    pub fn new(channel: &ChannelCodeSpec, options: DecoderOptions) -> Result<Self> {
        options.validate()?;
        let steps = channel
            .layout()
            .into_iter()
            .map(|slot| match slot {
                Some(v) => Step::Known(v, Touch::CHANNEL),
                None => Step::Split(Touch::CHANNEL),
            })
            .collect();
        Ok(Self {
            steps,
            info: channel.info().to_vec(),
            root: Vec::with_capacity(channel.len()),
            engine: ListEngine::new(Some(channel.log_len()), None),
            options,
        })
    }

    pub fn decode(&mut self, channel_llrs: &[f64]) -> Result<ChannelOutput> {
        if channel_llrs.len() != self.steps.len() {
            return invalid(format!(
                "{} channel LLRs supplied, code length is {}",
                channel_llrs.len(),
                self.steps.len()
            ));
        }
        saturate_into(&mut self.root, channel_llrs);
        let out = self.engine.run(
            &self.steps,
            &self.root,
            &[],
            self.options.list_size,
            self.options.check_node,
            None,
        )?;
        let u_hat = BitBlock::new(out.decisions)?;
        Ok(ChannelOutput { info: u_hat.select(&self.info)?, u_hat, metric: out.metric })
    }
}

/// One-shot channel SCL decoding; see [`ChannelDecoder`].
pub fn scl_decode(
    channel_llrs: &[f64],
    channel: &ChannelCodeSpec,
    options: DecoderOptions,
) -> Result<ChannelOutput> {
    ChannelDecoder::new(channel, options)?.decode(channel_llrs)
}

/// Output of source SCL decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceOutput {
    pub s_hat: BitBlock,
    pub c_hat: BitBlock,
    pub metric: f64,
}

/// Source SCL decoder: the high-entropy bits are given, the low-entropy
/// bits are decided from the Bernoulli prior alone.
pub struct SourceDecoder {
    is_high: Vec<bool>,
    steps: Vec<Step>,
    prior: Vec<f64>,
    engine: ListEngine,
    options: DecoderOptions,
    k: usize,
}

impl SourceDecoder {
    pub fn new(source: &SourceCodeSpec, options: DecoderOptions) -> Result<Self> {
        options.validate()?;
        let mut is_high = vec![false; source.len()];
        for &i in source.high_entropy() {
            is_high[i] = true;
        }
        Ok(Self {
            is_high,
            steps: Vec::with_capacity(source.len()),
            prior: vec![saturate(source.prior_llr()); source.len()],
            engine: ListEngine::new(None, Some(source.log_len())),
            options,
            k: source.k(),
        })
    }

    pub fn decode(&mut self, c_h: &BitBlock) -> Result<SourceOutput> {
        if c_h.len() != self.k {
            return invalid(format!("compressed word has length {}, expected {}", c_h.len(), self.k));
        }
        let mut known = c_h.iter();
        self.steps.clear();
        self.steps.extend(self.is_high.iter().map(|&high| {
            if high {
                Step::Known(*known.next().unwrap(), Touch::SOURCE)
            } else {
                Step::Split(Touch::SOURCE)
            }
        }));
        let out = self.engine.run(
            &self.steps,
            &[],
            &self.prior,
            self.options.list_size,
            self.options.check_node,
            None,
        )?;
        let mut s = out.decisions.clone();
        polar_transform_in_place(&mut s);
        Ok(SourceOutput { s_hat: BitBlock::new(s)?, c_hat: BitBlock::new(out.decisions)?, metric: out.metric })
    }
}

/// Separate decoding: channel SCL recovers `ĉ_H`, then source SCL expands it.
pub struct SeparateDecoder {
    channel: ChannelDecoder,
    source: SourceDecoder,
}

impl SeparateDecoder {
    pub fn new(
        source: &SourceCodeSpec,
        channel: &ChannelCodeSpec,
        options: DecoderOptions,
    ) -> Result<Self> {
        if source.k() != channel.k() {
            return invalid(format!(
                "source K = {} differs from channel K = {}",
                source.k(),
                channel.k()
            ));
        }
        Ok(Self {
            channel: ChannelDecoder::new(channel, options)?,
            source: SourceDecoder::new(source, options)?,
        })
    }

    pub fn decode(&mut self, channel_llrs: &[f64]) -> Result<BitBlock> {
        let c_h = self.channel.decode(channel_llrs)?.info;
        Ok(self.source.decode(&c_h)?.s_hat)
    }
}

/// One-shot separate decoding; see [`SeparateDecoder`].
pub fn sep_scl_decode(
    channel_llrs: &[f64],
    source: &SourceCodeSpec,
    channel: &ChannelCodeSpec,
    options: DecoderOptions,
) -> Result<BitBlock> {
    SeparateDecoder::new(source, channel, options)?.decode(channel_llrs)
}
