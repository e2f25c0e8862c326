use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

fn check_index_set(what: &str, n: u32, indices: &[usize]) -> Result<()> {
    if n > 24 {
        return invalid(format!("{} code: log2 length {} is too large", what, n));
    }
    let len = 1usize << n;
    if indices.is_empty() {
        return invalid(format!("{} code: index set must not be empty", what));
    }
    if indices.len() > len {
        return invalid(format!("{} code: {} indices exceed length {}", what, indices.len(), len));
    }
    for w in indices.windows(2) {
        if w[0] >= w[1] {
            return invalid(format!("{} code: index set is not strictly increasing", what));
        }
    }
    if let Some(&last) = indices.last() {
        if last >= len {
            return invalid(format!("{} code: index {} out of range 1..={}", what, last + 1, len));
        }
    }
    Ok(())
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 0.5) {
        return invalid(format!("source probability p = {} must lie in (0, 0.5)", p));
    }
    Ok(())
}

/// Complement of a sorted index set within `0..len`.
fn complement(len: usize, set: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(len - set.len());
    let mut it = set.iter().peekable();
    for i in 0..len {
        if it.peek() == Some(&&i) {
            it.next();
        } else {
            out.push(i);
        }
    }
    out
}

/// Source polar code `(N_s, K, H)` for a Bernoulli(`p`) source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CodeSpecDoc", into = "CodeSpecDoc")]
pub struct SourceCodeSpec {
    n: u32,
    high_entropy: Vec<usize>,
    low_entropy: Vec<usize>,
    p: f64,
}

impl SourceCodeSpec {
    /// `high_entropy` holds 0-based, strictly increasing indices.
    pub fn new(n: u32, high_entropy: Vec<usize>, p: f64) -> Result<Self> {
        check_index_set("source", n, &high_entropy)?;
        check_probability(p)?;
        let low_entropy = complement(1 << n, &high_entropy);
        Ok(Self { n, high_entropy, low_entropy, p })
    }

    pub fn log_len(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn k(&self) -> usize {
        self.high_entropy.len()
    }

    pub fn high_entropy(&self) -> &[usize] {
        &self.high_entropy
    }

    pub fn low_entropy(&self) -> &[usize] {
        &self.low_entropy
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Compression rate `K / N_s`.
    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.len() as f64
    }

    /// Stage-0 LLR of every source bit, `ln((1 - p) / p)`.
    pub fn prior_llr(&self) -> f64 {
        ((1.0 - self.p) / self.p).ln()
    }
}

/// Channel polar code `(N_c, K, A, u_{A^c})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CodeSpecDoc", into = "CodeSpecDoc")]
pub struct ChannelCodeSpec {
    n: u32,
    info: Vec<usize>,
    frozen: Vec<usize>,
    frozen_values: Vec<u8>,
}

impl ChannelCodeSpec {
    /// `info` holds 0-based, strictly increasing indices; frozen bits are zero.
    pub fn new(n: u32, info: Vec<usize>) -> Result<Self> {
        check_index_set("channel", n, &info)?;
        let frozen = complement(1 << n, &info);
        let frozen_values = vec![0; frozen.len()];
        Ok(Self { n, info, frozen, frozen_values })
    }

    /// Replaces the frozen values, one per frozen position in increasing order.
    pub fn with_frozen_values(mut self, values: Vec<u8>) -> Result<Self> {
        if values.len() != self.frozen.len() {
            return invalid(format!(
                "expected {} frozen values, got {}",
                self.frozen.len(),
                values.len()
            ));
        }
        if values.iter().any(|&b| b > 1) {
            return invalid("frozen values must be 0 or 1");
        }
        self.frozen_values = values;
        Ok(self)
    }

    pub fn log_len(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn k(&self) -> usize {
        self.info.len()
    }

    pub fn info(&self) -> &[usize] {
        &self.info
    }

    pub fn frozen_positions(&self) -> &[usize] {
        &self.frozen
    }

    pub fn frozen_values(&self) -> &[u8] {
        &self.frozen_values
    }

    /// Channel coding rate `K / N_c`.
    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.len() as f64
    }

    /// Per-position view: `None` for information bits, `Some(v)` for frozen bits.
    pub fn layout(&self) -> Vec<Option<u8>> {
        let mut out = vec![None; self.len()];
        for (&pos, &v) in self.frozen.iter().zip(&self.frozen_values) {
            out[pos] = Some(v);
        }
        out
    }
}

/// Serialized form of a code spec. Indices are 1-based.
///
/// A source spec carries `p` and an empty `frozen` list; a channel spec
/// carries one frozen value per frozen position and no `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSpecDoc {
    pub n: u32,
    #[serde(rename = "K")]
    pub k: usize,
    pub indices: Vec<usize>,
    #[serde(default)]
    pub frozen: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl CodeSpecDoc {
    fn zero_based(&self) -> Result<Vec<usize>> {
        if self.indices.len() != self.k {
            return invalid(format!("K = {} but {} indices listed", self.k, self.indices.len()));
        }
        self.indices
            .iter()
            .map(|&i| {
                i.checked_sub(1)
                    .ok_or_else(|| Error::InvalidArgument("indices are 1-based; got 0".into()))
            })
            .collect()
    }
}

impl From<SourceCodeSpec> for CodeSpecDoc {
    fn from(s: SourceCodeSpec) -> Self {
        CodeSpecDoc {
            n: s.n,
            k: s.k(),
            indices: s.high_entropy.iter().map(|i| i + 1).collect(),
            frozen: Vec::new(),
            p: Some(s.p),
        }
    }
}

impl TryFrom<CodeSpecDoc> for SourceCodeSpec {
    type Error = Error;

    fn try_from(doc: CodeSpecDoc) -> Result<Self> {
        let p = doc
            .p
            .ok_or_else(|| Error::InvalidArgument("source code spec requires p".into()))?;
        SourceCodeSpec::new(doc.n, doc.zero_based()?, p)
    }
}

impl From<ChannelCodeSpec> for CodeSpecDoc {
    fn from(c: ChannelCodeSpec) -> Self {
        CodeSpecDoc {
            n: c.n,
            k: c.k(),
            indices: c.info.iter().map(|i| i + 1).collect(),
            frozen: c.frozen_values,
            p: None,
        }
    }
}

impl TryFrom<CodeSpecDoc> for ChannelCodeSpec {
    type Error = Error;

    fn try_from(doc: CodeSpecDoc) -> Result<Self> {
        let spec = ChannelCodeSpec::new(doc.n, doc.zero_based()?)?;
        if doc.frozen.is_empty() {
            Ok(spec)
        } else {
            spec.with_frozen_values(doc.frozen)
        }
    }
}
