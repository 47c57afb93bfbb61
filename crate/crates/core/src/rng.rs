//! Seed derivation for reproducible random streams.
//!
//! Every randomized component takes an explicit `u64` seed. Sub-streams are
//! derived by mixing the parent seed with a stream key, so results never
//! depend on the order in which independent pieces of work are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RngSeed = u64;

/// The generator used throughout the crate.
pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `seed` and a stream key.
pub fn derive_seed(seed: RngSeed, key: u64) -> RngSeed {
    splitmix64(splitmix64(seed) ^ key.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Derive a child seed from a path of keys.
pub fn derive_seed_path(seed: RngSeed, keys: &[u64]) -> RngSeed {
    keys.iter().fold(seed, |s, &k| derive_seed(s, k))
}

pub fn stream(seed: RngSeed) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

pub fn substream(seed: RngSeed, key: u64) -> StreamRng {
    stream(derive_seed(seed, key))
}
