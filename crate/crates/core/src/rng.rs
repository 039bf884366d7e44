//! Seeded random streams.
//!
//! All randomness in the crate is drawn from ChaCha8 streams. A stream is
//! identified by a `(seed, stream_id)` pair: the seed initialises the key via
//! `seed_from_u64` and `stream_id` selects one of ChaCha's 2^64 independent
//! streams. Monte Carlo trial `t` of a run seeded with `s` uses seed
//! `s + t` (wrapping); within a trial, distinct purposes use distinct stream
//! ids (see the `STREAM_*` constants).

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Algorithm draws (initialisation, pulls, RAND samples).
pub const STREAM_ALGORITHM: u64 = 0;
/// Sub-Gaussian parameter estimation.
pub const STREAM_SIGMA: u64 = 1;
/// Dataset generation and subsampling.
pub const STREAM_DATA: u64 = 2;
/// Error-curve budgets: budget `k` of a curve uses `STREAM_BUDGET_BASE + k`.
pub const STREAM_BUDGET_BASE: u64 = 16;

pub fn stream(seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Stream for Monte Carlo trial `trial` of a run seeded with `seed`.
pub fn trial_stream(seed: u64, trial: u64, stream_id: u64) -> StreamRng {
    stream(seed.wrapping_add(trial), stream_id)
}

/// Uniform integer in `[0, bound)` by widening multiplication with rejection
/// (Lemire), so there is no modulo bias.
pub fn uniform_below<R: RngCore + ?Sized>(rng: &mut R, bound: u64) -> u64 {
    assert!(bound > 0, "uniform_below requires a positive bound");
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let product = u128::from(rng.next_u64()) * u128::from(bound);
        if (product as u64) >= threshold {
            return (product >> 64) as u64;
        }
    }
}

/// Uniform index in `[0, n)` other than `excluded`. Requires `n >= 2`.
pub fn uniform_other<R: RngCore + ?Sized>(rng: &mut R, n: usize, excluded: usize) -> usize {
    debug_assert!(n >= 2 && excluded < n);
    let j = uniform_below(rng, (n - 1) as u64) as usize;
    if j >= excluded {
        j + 1
    } else {
        j
    }
}
