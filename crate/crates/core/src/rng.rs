//! Counter-based random streams.
//!
//! Every Monte Carlo estimate owns a 64-bit seed derived from the run seed and
//! a label; walk `k` of that estimate draws from ChaCha stream `k`. The result
//! of a walk therefore depends only on `(seed, label, k)`, never on the thread
//! schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed, a label and an index.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    let mut h = mix(seed ^ 0x9e37_79b9_7f4a_7c15);
    for b in label.bytes() {
        h = mix(h ^ b as u64);
    }
    mix(h ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// The generator for walk `walk` of the estimate seeded with `seed`.
pub fn walk_stream(seed: u64, walk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(walk);
    rng
}
