//! Deterministic per-task seeding. Every random task derives its generator
//! from a hash of `(seed, task id, index)`, so results do not depend on the
//! order or thread on which tasks run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub(crate) fn mix(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x5151_5eed_0000_0001, |acc, &w| splitmix(acc ^ splitmix(w)))
}

pub(crate) fn task_rng(seed: u64, task: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(&[seed, task, index]))
}

/// Stable identifier for a polynomial-like object, built from its exponent
/// data and the bit patterns of its coefficients.
pub(crate) fn fingerprint<I: IntoIterator<Item = u64>>(words: I) -> u64 {
    let words: Vec<u64> = words.into_iter().collect();
    mix(&words)
}

/// Van der Corput radical inverse; used for low-discrepancy phase samples.
pub(crate) fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}
