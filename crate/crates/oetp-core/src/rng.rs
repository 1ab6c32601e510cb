//! Seeded randomness helpers shared by the generator and randomized
//! tie-breaking.
//!
//! All sampling goes through ChaCha8 seeded via a splitmix64 expansion of a
//! single `u64`, so identical seeds give identical streams on every platform.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// splitmix64 step, used to expand one seed word into a full RNG key.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Deterministic ChaCha8 stream from a single seed word.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw from `0..bound` by rejection, avoiding modulo bias.
pub fn uniform_below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    assert!(bound > 0, "uniform_below requires a positive bound");
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return v % bound;
        }
    }
}

/// Uniform draw from `lo..=hi`.
pub fn uniform_range(rng: &mut ChaCha8Rng, lo: u64, hi: u64) -> u64 {
    debug_assert!(lo <= hi);
    lo + uniform_below(rng, hi - lo + 1)
}

/// Uniform draw from `[0, 1)` with 53-bit resolution.
pub fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// `count` distinct values from `0..n`, sorted ascending.
///
/// Floyd's algorithm: one draw per selected value regardless of density.
pub fn sample_distinct(rng: &mut ChaCha8Rng, n: u64, count: usize) -> Vec<u64> {
    assert!(count as u64 <= n, "cannot draw {count} distinct from {n}");
    let mut picked: Vec<u64> = Vec::with_capacity(count);
    for j in (n - count as u64)..n {
        let t = uniform_below(rng, j + 1);
        // Insertion keeps `picked` sorted, so membership is a binary search.
        match picked.binary_search(&t) {
            Ok(_) => {
                let pos = picked.binary_search(&j).unwrap_err();
                picked.insert(pos, j);
            }
            Err(pos) => picked.insert(pos, t),
        }
    }
    picked
}

/// `count` distinct indices drawn without replacement with probability
/// proportional to `weights`, sorted ascending.
///
/// Rejection against the prefix-sum total: a hit on an already-picked index
/// is redrawn. When few unpicked indices remain (heavy rejection), falls back
/// to a linear renormalized draw over the unpicked set.
pub fn sample_weighted_distinct(rng: &mut ChaCha8Rng, weights: &[f64], count: usize) -> Vec<u64> {
    let n = weights.len();
    assert!(count <= n, "cannot draw {count} distinct from {n}");
    debug_assert!(weights.iter().all(|&w| w > 0.0 && w.is_finite()));

    let mut prefix: Vec<f64> = Vec::with_capacity(n);
    let mut total = 0.0f64;
    for &w in weights {
        total += w;
        prefix.push(total);
    }

    let mut picked_mask = alloc::vec![false; n];
    let mut picked: Vec<u64> = Vec::with_capacity(count);
    const MAX_REJECTS: u32 = 64;

    'outer: for _ in 0..count {
        for _ in 0..MAX_REJECTS {
            let target = unit_f64(rng) * total;
            let idx = prefix.partition_point(|&p| p <= target).min(n - 1);
            if !picked_mask[idx] {
                picked_mask[idx] = true;
                picked.push(idx as u64);
                continue 'outer;
            }
        }
        // Rejection stalled: draw over the remaining mass directly.
        let remaining: f64 = weights
            .iter()
            .enumerate()
            .filter(|(i, _)| !picked_mask[*i])
            .map(|(_, &w)| w)
            .sum();
        let mut target = unit_f64(rng) * remaining;
        let mut chosen = None;
        for (i, &w) in weights.iter().enumerate() {
            if picked_mask[i] {
                continue;
            }
            if target < w {
                chosen = Some(i);
                break;
            }
            target -= w;
        }
        let idx = chosen.unwrap_or_else(|| {
            picked_mask
                .iter()
                .rposition(|&p| !p)
                .expect("unpicked index must exist")
        });
        picked_mask[idx] = true;
        picked.push(idx as u64);
    }

    picked.sort_unstable();
    picked
}
