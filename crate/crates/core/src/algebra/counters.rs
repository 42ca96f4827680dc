//! Per-thread operation counters.
//!
//! Every pairing, curve scalar multiplication, target-group exponentiation and
//! hash call routed through [`crate::algebra`] bumps a thread-local counter.
//! The counts double as an energy proxy in benchmark reports and let tests
//! assert that a code path performs no pairings at all.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    pub pairings: u64,
    pub scalar_mults: u64,
    pub gt_exps: u64,
    pub hashes: u64,
}

impl OpCounts {
    pub fn since(&self, earlier: &OpCounts) -> OpCounts {
        OpCounts {
            pairings: self.pairings - earlier.pairings,
            scalar_mults: self.scalar_mults - earlier.scalar_mults,
            gt_exps: self.gt_exps - earlier.gt_exps,
            hashes: self.hashes - earlier.hashes,
        }
    }
}

thread_local! {
    static COUNTS: Cell<OpCounts> = const { Cell::new(OpCounts { pairings: 0, scalar_mults: 0, gt_exps: 0, hashes: 0 }) };
}

fn bump(f: impl FnOnce(&mut OpCounts)) {
    COUNTS.with(|c| {
        let mut v = c.get();
        f(&mut v);
        c.set(v);
    });
}

pub(crate) fn count_pairings(n: u64) {
    bump(|c| c.pairings += n);
}

pub(crate) fn count_scalar_mult() {
    bump(|c| c.scalar_mults += 1);
}

pub(crate) fn count_gt_exp() {
    bump(|c| c.gt_exps += 1);
}

pub(crate) fn count_hash() {
    bump(|c| c.hashes += 1);
}

/// Snapshot of this thread's counters.
pub fn op_counts() -> OpCounts {
    COUNTS.with(|c| c.get())
}

pub fn reset_op_counts() {
    COUNTS.with(|c| c.set(OpCounts::default()));
}

/// Runs `f` and returns its result with the operations it performed.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, OpCounts) {
    let before = op_counts();
    let out = f();
    (out, op_counts().since(&before))
}
