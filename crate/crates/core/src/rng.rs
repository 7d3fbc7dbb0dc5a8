//! Seeded random streams.
//!
//! Every stochastic operation takes a 64-bit seed and builds its own
//! ChaCha8 stream from it, so results are reproducible across platforms and
//! never depend on global state.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)` built from the top 53 bits of one `u64`.
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `[lo, hi]`; returns `lo` when the range is empty.
pub fn uniform(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        lo
    } else {
        lo + (hi - lo) * unit_f64(rng)
    }
}

pub fn bernoulli(rng: &mut impl RngCore, p: f64) -> bool {
    // p = 0 must never fire and p = 1 must always fire
    unit_f64(rng) < p
}
