//! Seed derivation for all stochastic stages.
//!
//! Every stage owns a ChaCha8 stream derived from the master seed and a list
//! of fixed tags (stage id, cluster index, feature index, row id, ...).
//! Streams are mutually independent, so adding a cluster or a feature never
//! perturbs draws belonging to earlier ones, and per-row work can run in any
//! order or in parallel without changing results.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// splitmix64 finalizer (bijective on u64).
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a new seed from `seed` and `tag`. Non-commutative: mixing tag A
/// then B yields a different seed than B then A.
pub fn mix(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag.wrapping_add(0xa076_1d64_78bd_642f)))
}

/// ChaCha8 stream for (seed, tags), mixing tags in order.
pub fn stream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut s = seed;
    for &t in tags {
        s = mix(s, t);
    }
    ChaCha8Rng::seed_from_u64(s)
}
