//! Deterministic seed derivation for nested parallel tasks.
//!
//! Every unit of concurrent work (a resample, a replicate, a bootstrap draw)
//! gets its own RNG seeded from the master seed and a tag path. The derivation
//! is a pure function, so results do not depend on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; decorrelates nearby inputs.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a tag path.
///
/// Distinct paths yield distinct, statistically independent seeds; the same
/// path always yields the same seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &tag in path {
        state = splitmix64(state ^ splitmix64(tag.wrapping_add(0xd1b5_4a32_d192_ed03)));
    }
    state
}

/// A ChaCha stream seeded from `derive_seed(master, path)`.
pub fn derived_rng(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
