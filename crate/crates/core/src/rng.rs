//! Seeded random streams.
//!
//! All randomness comes from ChaCha8 (`rand_chacha`), a generator whose
//! output is fixed for a given seed and stream across platforms and crate
//! releases. Index draws use a multiply-shift reduction of the raw 64-bit
//! output rather than `rand`'s range sampling, so splits and bootstrap
//! samples depend only on the ChaCha8 keystream.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator seeded from `seed`, positioned on stream `stream`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform index in `0..bound` (`bound > 0`).
pub fn index<R: RngCore + ?Sized>(rng: &mut R, bound: usize) -> usize {
    debug_assert!(bound > 0);
    // Lemire's multiply-shift; the bias is below 2^-32 for any bound that fits in memory.
    ((rng.next_u64() as u128 * bound as u128) >> 64) as usize
}

/// In-place Fisher-Yates shuffle driven by [`index`].
pub fn shuffle<T, R: RngCore + ?Sized>(rng: &mut R, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = index(rng, i + 1);
        items.swap(i, j);
    }
}
