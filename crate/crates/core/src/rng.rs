//! Seeded random streams.
//!
//! Every random draw in the crate comes from a stream keyed by
//! `(seed, index)`, so a parallel sweep and a serial sweep consume identical
//! numbers no matter how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Independent generator for item `index` of a run seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
