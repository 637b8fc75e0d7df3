//! Seed derivation. Every stochastic routine takes an explicit `u64` seed;
//! sub-streams (per shard, per trial) are derived by mixing the master seed
//! with the sub-stream index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type KpRng = ChaCha8Rng;

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of sub-stream `index` from `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix(mix(master) ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

/// Derives a seed from a path of indices, e.g. `(cell, trial)`.
pub fn derive_path(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(master, |acc, &i| derive_seed(acc, i))
}

pub fn rng_from_seed(seed: u64) -> KpRng {
    KpRng::seed_from_u64(seed)
}
