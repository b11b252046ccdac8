//! Seeded random number generation.
//!
//! Everything random in this crate (instance generation, rounding draws,
//! annealing proposals) runs on ChaCha8, a portable counter-based stream
//! cipher generator. A seed fully determines an instance or a run, so
//! results are reproducible across machines by publishing seeds alone.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as Rng;

/// Creates the crate-wide generator from a 64-bit seed.
pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Derives an independent stream for a sub-task without consuming the
/// parent stream. Plain splitmix-style mixing; collisions across distinct
/// `(seed, salt)` pairs are not a concern at benchmark scale.
pub fn derive(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
