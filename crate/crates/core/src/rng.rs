//! Deterministic stream splitting for parallel Monte Carlo.
//!
//! One master seed; every `(path, channel)` pair owns a counter-keyed ChaCha
//! stream. Paths therefore reproduce bit-for-bit regardless of thread
//! scheduling, and a one-dimensional comparison process can replay exactly
//! the Brownian increments and jump schedule of a full-system path by
//! opening the same channels.
//!
//! Channels per path: one Brownian channel per species (0..=2) and one jump
//! channel (3).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CHANNELS_PER_PATH: u64 = 4;
const JUMP_CHANNEL: u64 = 3;

pub(crate) fn brownian_stream(seed: u64, path_index: u64, species_index: usize) -> ChaCha8Rng {
    debug_assert!(species_index < 3);
    stream(seed, path_index, species_index as u64)
}

pub(crate) fn jump_stream(seed: u64, path_index: u64) -> ChaCha8Rng {
    stream(seed, path_index, JUMP_CHANNEL)
}

fn stream(seed: u64, path_index: u64, channel: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index.wrapping_mul(CHANNELS_PER_PATH) + channel);
    rng
}
