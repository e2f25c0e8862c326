//! List decoding engine shared by the joint, channel-only and source-only
//! decoders.
//!
//! A decoder is described by a schedule of [`Step`]s. Each step touches the
//! channel trellis, the source trellis, or both, at their next sub-level.
//! Known steps extend every path with a fixed bit; split steps extend every
//! path with both bits and keep the `L` extensions with the smallest metric.

use serde::Serialize;

use super::kernels::{decision_penalty, CheckNode};
use super::stages::{StageHandle, StageMemory};
use crate::error::{invalid, Result};

/// Which trellises a step advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Touch {
    pub channel: bool,
    pub source: bool,
}

impl Touch {
    pub const CHANNEL: Touch = Touch { channel: true, source: false };
    pub const SOURCE: Touch = Touch { channel: false, source: true };
    pub const BOTH: Touch = Touch { channel: true, source: true };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Step {
    Known(u8, Touch),
    Split(Touch),
}

/// One level of a decoder trace. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub phi: usize,
    pub kind: &'static str,
    pub i_c: Option<usize>,
    pub i_s: Option<usize>,
    /// Metrics of the surviving paths, in list order.
    pub surviving_jpms: Vec<f64>,
    /// Metric each survivor's parent had before this level.
    #[serde(skip_serializing)]
    pub parent_jpms: Vec<f64>,
    /// Metrics of all extensions considered at this level, before pruning.
    #[serde(skip_serializing)]
    pub candidate_jpms: Vec<f64>,
}

/// What the engine reports after each level when tracing.
pub(crate) struct LevelReport {
    pub level: usize,
    pub survivors: Vec<f64>,
    pub parents: Vec<f64>,
    pub candidates: Vec<f64>,
}

/// Per-path audit counters of the metric terms accumulated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MetricTerms {
    pub channel: usize,
    pub source: usize,
}

#[derive(Debug, Clone, Copy)]
struct PathState {
    channel: Option<StageHandle>,
    source: Option<StageHandle>,
    /// Index of the newest decision node in the arena, `NONE` for the empty path.
    last: u32,
    jpm: f64,
    id: u64,
    terms: MetricTerms,
}

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Candidate {
    metric: f64,
    id: u64,
    parent: usize,
    bit: u8,
}

/// Result of one engine run: the winning path.
#[derive(Debug, Clone)]
pub(crate) struct EngineOutput {
    pub decisions: Vec<u8>,
    pub metric: f64,
    pub terms: MetricTerms,
}

/// Reusable list decoder state; one instance per worker.
pub(crate) struct ListEngine {
    channel: Option<StageMemory>,
    source: Option<StageMemory>,
    paths: Vec<PathState>,
    next_paths: Vec<PathState>,
    candidates: Vec<Candidate>,
    arena: Vec<(u8, u32)>,
    keep: Vec<[bool; 2]>,
    llrs: Vec<(f64, f64)>,
    /// Parent index of each path in `paths`, valid after a split.
    origin: Vec<usize>,
    next_id: u64,
}

impl ListEngine {
    pub(crate) fn new(channel_log_len: Option<u32>, source_log_len: Option<u32>) -> Self {
        Self {
            channel: channel_log_len.map(StageMemory::new),
            source: source_log_len.map(StageMemory::new),
            paths: Vec::new(),
            next_paths: Vec::new(),
            candidates: Vec::new(),
            arena: Vec::new(),
            keep: Vec::new(),
            llrs: Vec::new(),
            origin: Vec::new(),
            next_id: 0,
        }
    }

    fn release_path(&mut self, p: &PathState) {
        if let (Some(m), Some(h)) = (self.channel.as_mut(), p.channel.as_ref()) {
            m.release(h);
        }
        if let (Some(m), Some(h)) = (self.source.as_mut(), p.source.as_ref()) {
            m.release(h);
        }
    }

    fn share_path(&mut self, p: &PathState) -> PathState {
        let mut q = *p;
        if let (Some(m), Some(h)) = (self.channel.as_mut(), p.channel.as_ref()) {
            q.channel = Some(m.share(h));
        }
        if let (Some(m), Some(h)) = (self.source.as_mut(), p.source.as_ref()) {
            q.source = Some(m.share(h));
        }
        q
    }

    /// Decision LLRs `(channel, source)` of path `k`; unused entries are 0.
    fn path_llrs(
        &mut self,
        k: usize,
        touch: Touch,
        channel_root: &[f64],
        source_root: &[f64],
        kernel: CheckNode,
    ) -> Result<(f64, f64)> {
        let p = &mut self.paths[k];
        let mut out = (0.0, 0.0);
        if touch.channel {
            let (m, h) = (self.channel.as_mut().unwrap(), p.channel.as_mut().unwrap());
            let leaf = h.next_leaf();
            out.0 = m.decision_llr(h, channel_root, leaf, kernel)?;
        }
        if touch.source {
            let (m, h) = (self.source.as_mut().unwrap(), p.source.as_mut().unwrap());
            let leaf = h.next_leaf();
            out.1 = m.decision_llr(h, source_root, leaf, kernel)?;
        }
        Ok(out)
    }

    fn extend(&mut self, p: &mut PathState, touch: Touch, llrs: (f64, f64), bit: u8) {
        if touch.channel {
            p.jpm += decision_penalty(llrs.0, bit);
            p.terms.channel += 1;
            self.channel.as_mut().unwrap().commit(p.channel.as_mut().unwrap(), bit);
        }
        if touch.source {
            p.jpm += decision_penalty(llrs.1, bit);
            p.terms.source += 1;
            self.source.as_mut().unwrap().commit(p.source.as_mut().unwrap(), bit);
        }
        self.arena.push((bit, p.last));
        p.last = (self.arena.len() - 1) as u32;
    }

    /// Runs the schedule, calling `on_level` after each level when tracing.
    pub(crate) fn run(
        &mut self,
        steps: &[Step],
        channel_root: &[f64],
        source_root: &[f64],
        list_size: usize,
        kernel: CheckNode,
        mut on_level: Option<&mut dyn FnMut(LevelReport)>,
    ) -> Result<EngineOutput> {
        if list_size == 0 {
            return invalid("list size must be at least 1");
        }
        if let Some(m) = &self.channel {
            if channel_root.len() != m.len() {
                return invalid(format!(
                    "{} channel LLRs supplied, code length is {}",
                    channel_root.len(),
                    m.len()
                ));
            }
        }
        if let Some(m) = &self.source {
            if source_root.len() != m.len() {
                return invalid(format!(
                    "{} source LLRs supplied, code length is {}",
                    source_root.len(),
                    m.len()
                ));
            }
        }

        if let Some(m) = self.channel.as_mut() {
            m.reset();
        }
        if let Some(m) = self.source.as_mut() {
            m.reset();
        }
        self.arena.clear();
        self.paths.clear();
        self.next_id = 1;
        let root = PathState {
            channel: self.channel.as_mut().map(StageMemory::fresh),
            source: self.source.as_mut().map(StageMemory::fresh),
            last: NONE,
            jpm: 0.0,
            id: 0,
            terms: MetricTerms::default(),
        };
        self.paths.push(root);

        for (level, &step) in steps.iter().enumerate() {
            let before: Vec<f64> = match on_level {
                Some(_) => self.paths.iter().map(|p| p.jpm).collect(),
                None => Vec::new(),
            };
            let candidates = match step {
                Step::Known(bit, touch) => {
                    for k in 0..self.paths.len() {
                        let llrs = self.path_llrs(k, touch, channel_root, source_root, kernel)?;
                        let mut p = self.paths[k];
                        self.extend(&mut p, touch, llrs, bit);
                        self.paths[k] = p;
                    }
                    self.origin.clear();
                    self.origin.extend(0..self.paths.len());
                    None
                }
                Step::Split(touch) => {
                    self.split(touch, channel_root, source_root, list_size, kernel, on_level.is_some())?
                }
            };
            if let Some(cb) = on_level.as_mut() {
                let survivors: Vec<f64> = self.paths.iter().map(|p| p.jpm).collect();
                cb(LevelReport {
                    level,
                    parents: self.origin.iter().map(|&k| before[k]).collect(),
                    candidates: candidates.unwrap_or_else(|| survivors.clone()),
                    survivors,
                });
            }
        }

        let best = *self
            .paths
            .iter()
            .min_by(|a, b| a.jpm.total_cmp(&b.jpm).then(a.id.cmp(&b.id)))
            .expect("path list is never empty");
        let mut decisions = vec![0u8; steps.len()];
        let mut node = best.last;
        for slot in decisions.iter_mut().rev() {
            let (bit, prev) = self.arena[node as usize];
            *slot = bit;
            node = prev;
        }
        debug_assert_eq!(node, NONE);
        Ok(EngineOutput { decisions, metric: best.jpm, terms: best.terms })
    }

    fn split(
        &mut self,
        touch: Touch,
        channel_root: &[f64],
        source_root: &[f64],
        list_size: usize,
        kernel: CheckNode,
        tracing: bool,
    ) -> Result<Option<Vec<f64>>> {
        self.candidates.clear();
        self.llrs.clear();
        for k in 0..self.paths.len() {
            let llrs = self.path_llrs(k, touch, channel_root, source_root, kernel)?;
            self.llrs.push(llrs);
            let p = &self.paths[k];
            let metric = |bit| {
                let mut m = p.jpm;
                if touch.channel {
                    m += decision_penalty(llrs.0, bit);
                }
                if touch.source {
                    m += decision_penalty(llrs.1, bit);
                }
                m
            };
            self.candidates.push(Candidate { metric: metric(0), id: p.id, parent: k, bit: 0 });
            self.candidates.push(Candidate { metric: metric(1), id: self.next_id, parent: k, bit: 1 });
            self.next_id += 1;
        }
        let all = tracing.then(|| self.candidates.iter().map(|c| c.metric).collect());
        if self.candidates.len() > list_size {
            self.candidates
                .sort_unstable_by(|a, b| a.metric.total_cmp(&b.metric).then(a.id.cmp(&b.id)));
            self.candidates.truncate(list_size);
        }

        self.keep.clear();
        self.keep.resize(self.paths.len(), [false; 2]);
        for c in &self.candidates {
            self.keep[c.parent][c.bit as usize] = true;
        }
        // Free dropped parents first so their slots can be reused.
        for k in 0..self.paths.len() {
            if self.keep[k] == [false, false] {
                let p = self.paths[k];
                self.release_path(&p);
            }
        }
        self.next_paths.clear();
        self.origin.clear();
        for k in 0..self.paths.len() {
            let parent = self.paths[k];
            let llrs = self.llrs[k];
            match self.keep[k] {
                [false, false] => {}
                [true, false] => {
                    let mut p = parent;
                    self.extend(&mut p, touch, llrs, 0);
                    self.next_paths.push(p);
                    self.origin.push(k);
                }
                [false, true] => {
                    let mut p = parent;
                    p.id = self.one_child_id(k);
                    self.extend(&mut p, touch, llrs, 1);
                    self.next_paths.push(p);
                    self.origin.push(k);
                }
                [true, true] => {
                    let mut one = self.share_path(&parent);
                    one.id = self.one_child_id(k);
                    let mut zero = parent;
                    self.extend(&mut zero, touch, llrs, 0);
                    self.extend(&mut one, touch, llrs, 1);
                    self.next_paths.push(zero);
                    self.next_paths.push(one);
                    self.origin.extend([k, k]);
                }
            }
        }
        std::mem::swap(&mut self.paths, &mut self.next_paths);
        Ok(all)
    }

    /// Id given to the 1-extension of parent `k` in the current split.
    fn one_child_id(&self, k: usize) -> u64 {
        self.next_id - (self.paths.len() - k) as u64
    }
}
