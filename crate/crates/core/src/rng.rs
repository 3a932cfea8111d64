//! Seed derivation for reproducible replicas.
//!
//! Every experiment takes one 64-bit master seed. Replica `r` (or any other
//! labelled sub-stream) gets `derive_seed(seed, r)`, which is a SplitMix64
//! finalizer over the pair, so streams are decorrelated and independent of
//! the order in which replicas are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `index` of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Named sub-streams, so that e.g. the coarse process of replica 3 never
/// shares bits with its base process.
pub fn derive_tagged(seed: u64, tag: &str, index: u64) -> u64 {
    let mut h = seed;
    for b in tag.bytes() {
        h = splitmix64(h ^ b as u64);
    }
    derive_seed(h, index)
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
