//! Exhaustive verification oracle.
//!
//! Enumerates every assignment vector in lexicographic order (unassigned
//! sorts before any schedule) with feasibility pruning and an optimistic
//! value cut. Because subtrees are only cut when they cannot strictly beat
//! the best value seen, the first optimum reached is the lexicographically
//! smallest one, which makes the result a stable fixture for tests.

use alloc::vec::Vec;
use core::fmt;

use crate::model::{CandidateId, Instance, ResidualTracker, Solution};

/// Default ceiling on the enumeration size Π(|compat_i| + 1).
pub const DEFAULT_LEAF_CAP: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruteForceError {
    /// The assignment-vector space exceeds the leaf cap. `leaves` is the
    /// partial product at which the cap was crossed.
    SearchTooLarge { leaves: u128, cap: u64 },
}

impl fmt::Display for BruteForceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BruteForceError::SearchTooLarge { leaves, cap } => write!(
                f,
                "enumeration needs at least {leaves} leaves, cap is {cap}"
            ),
        }
    }
}

impl core::error::Error for BruteForceError {}

/// Exhaustive solve under [`DEFAULT_LEAF_CAP`].
pub fn brute_force_solve(instance: &Instance) -> Result<Solution, BruteForceError> {
    brute_force_solve_capped(instance, DEFAULT_LEAF_CAP)
}

/// Exhaustive solve with an explicit leaf cap.
pub fn brute_force_solve_capped(
    instance: &Instance,
    cap: u64,
) -> Result<Solution, BruteForceError> {
    let mut leaves: u128 = 1;
    for list in &instance.compat {
        leaves = leaves.saturating_mul(list.len() as u128 + 1);
        if leaves > cap as u128 {
            return Err(BruteForceError::SearchTooLarge { leaves, cap });
        }
    }

    // Candidates with an empty compatibility list are always unassigned;
    // skipping them keeps the recursion depth at most log2(cap).
    let work: Vec<u32> = (0..instance.num_candidates() as u32)
        .filter(|&i| !instance.compat[i as usize].is_empty())
        .collect();

    let mut state = Dfs {
        instance,
        work: &work,
        tracker: ResidualTracker::new(instance),
        current: Solution::empty(instance.num_candidates()),
        best: Solution::empty(instance.num_candidates()),
    };
    state.descend(0);
    Ok(state.best)
}

struct Dfs<'a> {
    instance: &'a Instance,
    work: &'a [u32],
    tracker: ResidualTracker,
    current: Solution,
    best: Solution,
}

impl Dfs<'_> {
    fn descend(&mut self, depth: usize) {
        let remaining = (self.work.len() - depth) as u32;
        if self.current.value() + remaining <= self.best.value() {
            return;
        }
        let Some(&raw) = self.work.get(depth) else {
            // Strict improvement keeps the first (lexicographically
            // smallest) optimum.
            if self.current.value() > self.best.value() {
                self.best = self.current.clone();
            }
            return;
        };
        let candidate = CandidateId::new(raw);

        self.descend(depth + 1);

        for idx in 0..self.instance.compat[raw as usize].len() {
            let schedule = self.instance.compat[raw as usize][idx];
            if !self.tracker.fits(self.instance, schedule) {
                continue;
            }
            self.tracker.assign(self.instance, schedule);
            self.current.set(candidate, Some(schedule));
            self.descend(depth + 1);
            self.current.set(candidate, None);
            self.tracker.unassign(self.instance, schedule);
        }
    }
}
