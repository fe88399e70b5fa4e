//! Deterministic seed derivation so that every RNG stream (per trace, per
//! agent, per experiment cell) is a pure function of the master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, tag: u64) -> u64 {
    mix(mix(base) ^ tag.rotate_left(17))
}

/// Stream tags, kept distinct so streams never alias.
pub mod stream {
    pub const TRACE: u64 = 0x7472_6163;
    pub const AGENT: u64 = 0x6167_656e;
    pub const CELL: u64 = 0x6365_6c6c;
}

pub fn rng_for(base: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(derive_seed(base, stream), index))
}
