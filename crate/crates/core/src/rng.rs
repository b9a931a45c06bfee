//! Explicitly seeded, splittable random streams.
//!
//! Every stochastic routine takes a caller-supplied generator. Monte Carlo
//! drivers draw one base seed from it and then give trial `k` its own ChaCha
//! stream `(base, k)`, so results do not depend on thread scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws a base seed for a family of child streams.
pub fn fork<R: RngCore + ?Sized>(rng: &mut R) -> u64 {
    rng.next_u64()
}

/// SplitMix64 finalizer.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stable 64-bit digest of a word slice under `seed`.
pub fn hash_words(seed: u64, words: &[u64]) -> u64 {
    let mut h = mix64(seed ^ (words.len() as u64).rotate_left(32));
    for &w in words {
        h = mix64(h ^ w);
    }
    h
}

/// Uniform double in `[0, 1)` derived from a digest.
pub fn unit_from_hash(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Runs `trials` independent trials in parallel and sums their integer
/// tallies. Integer addition is associative, so the result is identical for
/// any thread count.
pub fn tally<const K: usize, F>(base: u64, first: u64, trials: u64, f: F) -> [u64; K]
where
    F: Fn(&mut StreamRng, u64) -> [u64; K] + Sync,
{
    (first..first + trials)
        .into_par_iter()
        .map(|k| f(&mut stream(base, k), k))
        .reduce(
            || [0; K],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Ordered parallel map over trial indices.
pub fn par_map<T, F>(base: u64, trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng, u64) -> T + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|k| f(&mut stream(base, k), k))
        .collect()
}
