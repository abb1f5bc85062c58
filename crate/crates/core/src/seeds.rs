//! Deterministic substream seeds for chunked Monte Carlo.
//!
//! A substream seed is `mix(mix(master) ^ mix(chunk + GAMMA))`, where `mix`
//! is the SplitMix64 finalizer. `mix` is a bijection on `u64`, so for a fixed
//! master seed distinct chunk indices always yield distinct seeds. Only
//! wrapping integer arithmetic is involved, so the mapping is identical on
//! every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn seed_derivation(master_seed: u64, chunk_index: u64) -> u64 {
    mix(mix(master_seed) ^ mix(chunk_index.wrapping_add(GAMMA)))
}

/// The random stream used for chunk `chunk_index` of a run seeded with `master_seed`.
pub fn substream(master_seed: u64, chunk_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed_derivation(master_seed, chunk_index))
}
