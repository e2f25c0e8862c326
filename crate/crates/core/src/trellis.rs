//! Compound source-channel trellis.
//!
//! The channel input bits `u_A` are copies of the high-entropy source bits
//! `c_H`, so one decoding schedule of `N = N_s + N_c − K` levels covers both
//! codes. Each level is one of:
//!
//! - JSC: an information bit fused with a high-entropy bit,
//! - low-entropy: a source bit that the channel code never sees,
//! - frozen: a channel bit with a known value.
//!
//! Levels are 0-based here; [`TrellisLevel`] and the JSON dump report them
//! 1-based.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::polar::{ChannelCodeSpec, SourceCodeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum NodeKind {
    Frozen,
    #[serde(rename = "JSC")]
    Jsc,
    LowEntropy,
}

/// Channel and source sub-levels (0-based) visited at one compound level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelMap {
    pub channel: Option<usize>,
    pub source: Option<usize>,
}

/// Computes the JSC set `J` and low-entropy set `W` (0-based levels).
///
/// With `h_0 = a_0 = 0` and 1-based sets:
///
/// - `j_i = a_i + ε_i`, `ε_i = Σ_{k≤i} (h_k − h_{k−1} − 1)` low-entropy bits before `h_i`;
/// - `w_i = h^c_i + τ_i`, `τ_i = Σ_{k≤ε} (a_k − a_{k−1} − 1)` frozen bits before
///   `a_ε`, where `ε = Σ_{k≤i} (h^c_k − h^c_{k−1} − 1)` counts the high-entropy
///   bits before `h^c_i`.
pub fn build_jw_sets(
    source: &SourceCodeSpec,
    channel: &ChannelCodeSpec,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if source.k() != channel.k() {
        return invalid(format!(
            "source K = {} differs from channel K = {}",
            source.k(),
            channel.k()
        ));
    }
    // 1-based copies so the sums read as written above.
    let h: Vec<usize> = source.high_entropy().iter().map(|i| i + 1).collect();
    let hc: Vec<usize> = source.low_entropy().iter().map(|i| i + 1).collect();
    let a: Vec<usize> = channel.info().iter().map(|i| i + 1).collect();

    // frozen_before[e] = Σ_{k=1}^{e} (a_k − a_{k−1} − 1)
    let mut frozen_before = Vec::with_capacity(a.len() + 1);
    frozen_before.push(0usize);
    let mut prev = 0;
    for &ai in &a {
        frozen_before.push(frozen_before.last().unwrap() + (ai - prev - 1));
        prev = ai;
    }

    let mut j = Vec::with_capacity(h.len());
    let mut eps = 0;
    let mut prev = 0;
    for (hi, ai) in h.iter().zip(&a) {
        eps += hi - prev - 1;
        prev = *hi;
        j.push(ai + eps - 1);
    }

    let mut w = Vec::with_capacity(hc.len());
    let mut eps = 0;
    let mut prev = 0;
    for &hci in &hc {
        eps += hci - prev - 1;
        prev = hci;
        w.push(hci + frozen_before[eps] - 1);
    }
    Ok((j, w))
}

/// One row of the trellis dump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrellisLevel {
    pub level: usize,
    pub kind: NodeKind,
    pub i_c: Option<usize>,
    pub i_s: Option<usize>,
}

/// Merged decoding schedule for one (source, channel) code pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundTrellis {
    n_source: usize,
    n_channel: usize,
    jsc: Vec<usize>,
    low_entropy: Vec<usize>,
    kinds: Vec<NodeKind>,
    level_map: Vec<LevelMap>,
    frozen_values: Vec<u8>,
}

impl CompoundTrellis {
    /// Builds and validates the trellis. Fails on mismatched `K` or, with
    /// [`Error::Consistency`], on the first level that breaks an invariant.
    pub fn new(source: &SourceCodeSpec, channel: &ChannelCodeSpec) -> Result<Self> {
        let (jsc, low_entropy) = build_jw_sets(source, channel)?;
        let n_source = source.len();
        let n_channel = channel.len();
        let total = n_source + n_channel - source.k();

        let mut kinds = vec![NodeKind::Frozen; total];
        for (&lvl, kind) in jsc
            .iter()
            .map(|l| (l, NodeKind::Jsc))
            .chain(low_entropy.iter().map(|l| (l, NodeKind::LowEntropy)))
        {
            if lvl >= total {
                return Err(Error::Consistency(format!(
                    "level {} lies beyond N = {}",
                    lvl + 1,
                    total
                )));
            }
            if kinds[lvl] != NodeKind::Frozen {
                return Err(Error::Consistency(format!(
                    "level {} is both JSC and low-entropy",
                    lvl + 1
                )));
            }
            kinds[lvl] = kind;
        }

        let layout = channel.layout();
        let source_high: Vec<bool> = {
            let mut v = vec![false; n_source];
            for &i in source.high_entropy() {
                v[i] = true;
            }
            v
        };
        let mut level_map = Vec::with_capacity(total);
        let mut frozen_values = Vec::with_capacity(channel.frozen_positions().len());
        let (mut ic, mut is) = (0usize, 0usize);
        for (lvl, &kind) in kinds.iter().enumerate() {
            let bad = |what: &str| {
                Err(Error::Consistency(format!("level {} ({:?}): {}", lvl + 1, kind, what)))
            };
            let map = match kind {
                NodeKind::Frozen => {
                    match layout.get(ic) {
                        Some(Some(v)) => frozen_values.push(*v),
                        Some(None) => return bad("channel sub-level is an information bit"),
                        None => return bad("channel sub-levels exhausted"),
                    }
                    ic += 1;
                    LevelMap { channel: Some(ic - 1), source: None }
                }
                NodeKind::LowEntropy => {
                    match source_high.get(is) {
                        Some(false) => {}
                        Some(true) => return bad("source sub-level is a high-entropy bit"),
                        None => return bad("source sub-levels exhausted"),
                    }
                    is += 1;
                    LevelMap { channel: None, source: Some(is - 1) }
                }
                NodeKind::Jsc => {
                    match layout.get(ic) {
                        Some(None) => {}
                        Some(Some(_)) => return bad("channel sub-level is frozen"),
                        None => return bad("channel sub-levels exhausted"),
                    }
                    match source_high.get(is) {
                        Some(true) => {}
                        Some(false) => return bad("source sub-level is a low-entropy bit"),
                        None => return bad("source sub-levels exhausted"),
                    }
                    ic += 1;
                    is += 1;
                    LevelMap { channel: Some(ic - 1), source: Some(is - 1) }
                }
            };
            level_map.push(map);
        }
        if ic != n_channel || is != n_source {
            return Err(Error::Consistency(format!(
                "sub-level enumeration ended at i_c = {}, i_s = {} (expected {}, {})",
                ic, is, n_channel, n_source
            )));
        }

        Ok(Self { n_source, n_channel, jsc, low_entropy, kinds, level_map, frozen_values })
    }

    /// Total number of levels `N = N_s + N_c − K`.
    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn source_len(&self) -> usize {
        self.n_source
    }

    pub fn channel_len(&self) -> usize {
        self.n_channel
    }

    pub fn jsc(&self) -> &[usize] {
        &self.jsc
    }

    pub fn low_entropy(&self) -> &[usize] {
        &self.low_entropy
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn level_map(&self) -> &[LevelMap] {
        &self.level_map
    }

    /// Frozen bit values in level order.
    pub fn frozen_values(&self) -> &[u8] {
        &self.frozen_values
    }

    /// Rows for `--dump-trellis`, 1-based.
    pub fn dump(&self) -> Vec<TrellisLevel> {
        self.kinds
            .iter()
            .zip(&self.level_map)
            .enumerate()
            .map(|(lvl, (&kind, map))| TrellisLevel {
                level: lvl + 1,
                kind,
                i_c: map.channel.map(|i| i + 1),
                i_s: map.source.map(|i| i + 1),
            })
            .collect()
    }
}
