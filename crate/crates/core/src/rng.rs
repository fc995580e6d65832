//! Seed derivation for reproducible, schedule-independent simulation.
//!
//! Every stochastic unit of work (a corpus record, an episode, a Q* rollout)
//! gets its own generator whose seed is a pure function of the global seed and
//! the unit's coordinates, so parallel execution order never changes results.

use std::hash::Hasher;

use fnv::FnvHasher;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a sequence of coordinates.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn derive(base: u64, parts: &[u64]) -> SimRng {
    seeded(derive_seed(base, parts))
}

/// Stable 64-bit hash of a string key (query ids and the like).
pub fn key_hash(key: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(key.as_bytes());
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn derived_streams_are_stable_and_distinct() {
        let a = derive_seed(42, &[1, 2]);
        assert_eq!(a, derive_seed(42, &[1, 2]));
        assert_ne!(a, derive_seed(42, &[2, 1]));
        assert_ne!(a, derive_seed(43, &[1, 2]));
        assert_eq!(derive(7, &[3]).next_u64(), derive(7, &[3]).next_u64());
    }

    #[test]
    fn key_hash_is_fixed() {
        // FNV-1a 64 offset basis for the empty string.
        assert_eq!(key_hash(""), 0xcbf2_9ce4_8422_2325);
    }
}
