//! Seed derivation for reproducible pipelines.
//!
//! A single global seed is split into independent per-stage seeds by hashing
//! the seed together with a stage label. The hash is FNV-1a, implemented
//! inline so derived seeds never change underneath a pinned toolchain.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Derive a per-stage seed from a global seed and a stage label.
///
/// Distinct labels give independent streams; the same (seed, label) pair
/// always gives the same result.
pub fn derive_seed(global: u64, label: &str) -> u64 {
    let mut hash = FNV_OFFSET;
    for byte in global.to_le_bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    for byte in label.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Seeded RNG used everywhere randomness is needed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
