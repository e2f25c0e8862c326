//! Shared stage memory for successive-cancellation list decoding.
//!
//! A trellis of length `N = 2^n` is decoded as a binary tree: the root holds
//! the stage-0 LLRs, the left child of a node receives `f` of its two halves
//! and the right child receives `g` of them given the left child's
//! re-encoded bits. Leaves, left to right, are `u_1 .. u_N` in natural order.
//! Only the nodes on the path to the current leaf are live, so each depth
//! `d ≥ 1` needs one LLR buffer of `N >> d` values and one partial-sum buffer
//! of `N >> (d−1)` bits (the two children of the live depth-`d−1` node).
//!
//! Buffers live in per-depth slot pools with reference counts. Cloning a
//! path shares every slot; a path takes a private slot the first time it
//! writes to a shared depth. LLR buffers are always overwritten in full, so
//! only partial-sum buffers are copied on write.

use super::kernels::{f_min_sum, f_op, g_op, CheckNode};
use crate::error::{Error, Result};

pub(crate) const MAX_LOG_LEN: usize = 24;

/// Per-path view into a [`StageMemory`]: one slot per depth plus the index
/// of the next leaf to decide.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StageHandle {
    llr: [u32; MAX_LOG_LEN + 1],
    bits: [u32; MAX_LOG_LEN + 1],
    next: usize,
}

impl StageHandle {
    pub(crate) fn next_leaf(&self) -> usize {
        self.next
    }
}

struct Pool<T> {
    size: usize,
    data: Vec<T>,
    refs: Vec<u32>,
    free: Vec<u32>,
}

impl<T: Copy + Default> Pool<T> {
    fn new(size: usize) -> Self {
        Self { size, data: Vec::new(), refs: Vec::new(), free: Vec::new() }
    }

    fn alloc(&mut self) -> u32 {
        if let Some(slot) = self.free.pop() {
            self.refs[slot as usize] = 1;
            slot
        } else {
            let slot = self.refs.len() as u32;
            self.refs.push(1);
            self.data.resize(self.data.len() + self.size, T::default());
            slot
        }
    }

    fn retain(&mut self, slot: u32) {
        self.refs[slot as usize] += 1;
    }

    fn release(&mut self, slot: u32) {
        let r = &mut self.refs[slot as usize];
        *r -= 1;
        if *r == 0 {
            self.free.push(slot);
        }
    }

    /// Makes `slot` private, copying its contents when `copy` is set.
    fn make_private(&mut self, slot: &mut u32, copy: bool) {
        if self.refs[*slot as usize] > 1 {
            let old = *slot;
            self.refs[old as usize] -= 1;
            let new = self.alloc();
            if copy {
                let (o, n) = (old as usize * self.size, new as usize * self.size);
                self.data.copy_within(o..o + self.size, n);
            }
            *slot = new;
        }
    }

    fn range(&self, slot: u32) -> std::ops::Range<usize> {
        let o = slot as usize * self.size;
        o..o + self.size
    }

    fn live(&self) -> usize {
        self.refs.len() - self.free.len()
    }

    fn reset(&mut self) {
        self.refs.clear();
        self.free.clear();
        self.data.clear();
    }
}

/// Slot pools for one trellis of length `2^n`.
pub(crate) struct StageMemory {
    n: usize,
    llr: Vec<Pool<f64>>,
    bits: Vec<Pool<u8>>,
}

impl StageMemory {
    pub(crate) fn new(n: u32) -> Self {
        let n = n as usize;
        assert!(n <= MAX_LOG_LEN);
        let len = 1usize << n;
        // depth 0 is the caller's root buffer; keep empty pools for indexing
        let llr = (0..=n).map(|d| Pool::new(if d == 0 { 0 } else { len >> d })).collect();
        let bits = (0..=n).map(|d| Pool::new(if d == 0 { 0 } else { len >> (d - 1) })).collect();
        Self { n, llr, bits }
    }

    pub(crate) fn len(&self) -> usize {
        1 << self.n
    }

    /// Drops every slot; all outstanding handles become invalid.
    pub(crate) fn reset(&mut self) {
        self.llr.iter_mut().for_each(Pool::reset);
        self.bits.iter_mut().for_each(Pool::reset);
    }

    pub(crate) fn fresh(&mut self) -> StageHandle {
        let mut h = StageHandle { llr: [0; MAX_LOG_LEN + 1], bits: [0; MAX_LOG_LEN + 1], next: 0 };
        for d in 1..=self.n {
            h.llr[d] = self.llr[d].alloc();
            h.bits[d] = self.bits[d].alloc();
        }
        h
    }

    pub(crate) fn share(&mut self, h: &StageHandle) -> StageHandle {
        for d in 1..=self.n {
            self.llr[d].retain(h.llr[d]);
            self.bits[d].retain(h.bits[d]);
        }
        *h
    }

    pub(crate) fn release(&mut self, h: &StageHandle) {
        for d in 1..=self.n {
            self.llr[d].release(h.llr[d]);
            self.bits[d].release(h.bits[d]);
        }
    }

    /// Number of live LLR slots summed over depths.
    #[allow(dead_code)]
    pub(crate) fn live_slots(&self) -> usize {
        self.llr.iter().map(Pool::live).sum()
    }

    /// Decision LLR of leaf `leaf`, which must be the next undecided leaf of
    /// `h`. Recomputes only the depths invalidated by the previous decision.
    pub(crate) fn decision_llr(
        &mut self,
        h: &mut StageHandle,
        root: &[f64],
        leaf: usize,
        kernel: CheckNode,
    ) -> Result<f64> {
        let n = self.n;
        if leaf != h.next || leaf >= self.len() {
            return Err(Error::Consistency(format!(
                "sub-level {} requested, next undecided is {} of {}",
                leaf + 1,
                h.next + 1,
                self.len()
            )));
        }
        debug_assert_eq!(root.len(), self.len());
        if n == 0 {
            return Ok(root[0]);
        }
        // Leaves leaf−1 and leaf share the path down to depth n−1−tz(leaf).
        let first = if leaf == 0 { 1 } else { n - leaf.trailing_zeros() as usize };
        for d in first..=n {
            let size = self.len() >> d;
            self.llr[d].make_private(&mut h.llr[d], false);
            let (upper, lower) = self.llr.split_at_mut(d);
            let child_pool = &mut lower[0];
            let r = child_pool.range(h.llr[d]);
            let child = &mut child_pool.data[r];
            let parent: &[f64] = if d == 1 {
                root
            } else {
                let p = &upper[d - 1];
                &p.data[p.range(h.llr[d - 1])]
            };
            let (pa, pb) = parent.split_at(size);
            if (leaf >> (n - d)) & 1 == 1 {
                let bp = &self.bits[d];
                let left = &bp.data[bp.range(h.bits[d])][..size];
                for (((c, &a), &b), &u) in child.iter_mut().zip(pa).zip(pb).zip(left) {
                    *c = g_op(a, b, u);
                }
            } else {
                match kernel {
                    CheckNode::Exact => {
                        for ((c, &a), &b) in child.iter_mut().zip(pa).zip(pb) {
                            *c = f_op(a, b);
                        }
                    }
                    CheckNode::MinSum => {
                        for ((c, &a), &b) in child.iter_mut().zip(pa).zip(pb) {
                            *c = f_min_sum(a, b);
                        }
                    }
                }
            }
        }
        let p = &self.llr[n];
        Ok(p.data[p.range(h.llr[n])][0])
    }

    /// Commits `bit` as the value of the next leaf and propagates partial sums.
    pub(crate) fn commit(&mut self, h: &mut StageHandle, bit: u8) {
        let n = self.n;
        let leaf = h.next;
        debug_assert!(leaf < self.len());
        h.next += 1;
        if n == 0 {
            return;
        }
        self.bits[n].make_private(&mut h.bits[n], true);
        let r = self.bits[n].range(h.bits[n]);
        self.bits[n].data[r][leaf & 1] = bit;

        // While the finished node at depth d is a right child, fold the
        // pair (left, right) into (left ⊕ right, right) in the parent's slot.
        let mut d = n;
        while d >= 2 && (leaf >> (n - d)) & 1 == 1 {
            let size = self.len() >> d;
            let parent_side = (leaf >> (n - d + 1)) & 1;
            self.bits[d - 1].make_private(&mut h.bits[d - 1], true);
            let (upper, lower) = self.bits.split_at_mut(d);
            let src_pool = &lower[0];
            let src = &src_pool.data[src_pool.range(h.bits[d])];
            let dst_pool = &mut upper[d - 1];
            let r = dst_pool.range(h.bits[d - 1]);
            let dst = &mut dst_pool.data[r][parent_side * 2 * size..(parent_side + 1) * 2 * size];
            let (sl, sr) = src.split_at(size);
            let (dl, dr) = dst.split_at_mut(size);
            for (((o, &a), &b), o2) in dl.iter_mut().zip(sl).zip(sr).zip(dr.iter_mut()) {
                *o = a ^ b;
                *o2 = b;
            }
            d -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::kernels::f_op;

    #[test]
    fn single_butterfly() {
        let mut mem = StageMemory::new(1);
        let mut h = mem.fresh();
        let root = [1.5, -0.5];
        let l1 = mem.decision_llr(&mut h, &root, 0, CheckNode::Exact).unwrap();
        assert_eq!(l1, f_op(1.5, -0.5));
        mem.commit(&mut h, 1);
        let l2 = mem.decision_llr(&mut h, &root, 1, CheckNode::Exact).unwrap();
        assert_eq!(l2, g_op(1.5, -0.5, 1));
    }

    #[test]
    fn symmetric_prior_first_leaf() {
        let mut mem = StageMemory::new(2);
        let mut h = mem.fresh();
        let lam = 2.586_689;
        let root = [lam; 4];
        let l = mem.decision_llr(&mut h, &root, 0, CheckNode::Exact).unwrap();
        let inner = f_op(lam, lam);
        assert_eq!(l, f_op(inner, inner));
    }

    #[test]
    fn out_of_order_request_is_an_error() {
        let mut mem = StageMemory::new(2);
        let mut h = mem.fresh();
        let root = [1.0; 4];
        assert!(matches!(
            mem.decision_llr(&mut h, &root, 1, CheckNode::Exact),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn shared_handles_copy_on_write() {
        let mut mem = StageMemory::new(3);
        let mut a = mem.fresh();
        let root = [0.3, -1.2, 2.0, 0.7, -0.4, 1.1, 0.9, -2.2];
        mem.decision_llr(&mut a, &root, 0, CheckNode::Exact).unwrap();
        let mut b = mem.share(&a);
        mem.commit(&mut a, 0);
        mem.commit(&mut b, 1);
        let la = mem.decision_llr(&mut a, &root, 1, CheckNode::Exact).unwrap();
        let lb = mem.decision_llr(&mut b, &root, 1, CheckNode::Exact).unwrap();
        assert_ne!(la, lb);
        // re-evaluating a's buffers after b wrote must be unaffected
        let mut a2 = mem.fresh();
        mem.decision_llr(&mut a2, &root, 0, CheckNode::Exact).unwrap();
        mem.commit(&mut a2, 0);
        assert_eq!(mem.decision_llr(&mut a2, &root, 1, CheckNode::Exact).unwrap(), la);
        mem.release(&a);
        mem.release(&b);
        mem.release(&a2);
        assert_eq!(mem.live_slots(), 0);
    }
}
