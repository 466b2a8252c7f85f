//! Seed derivation for independent deterministic RNG streams.
//!
//! Every randomized stage (init, shuffling, dropout, sampling) runs on its own
//! stream derived from the master seed and a purpose tag, so adding or removing
//! one stage never perturbs the others.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mix a master seed with a purpose tag (FNV-1a over the tag bytes).
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325 ^ seed.wrapping_mul(0x100000001b3);
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Derived stream that also folds in a stage index (e.g. pretraining iteration).
pub fn stream(seed: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag).wrapping_add(index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_separate_streams() {
        assert_ne!(derive_seed(7, "shuffle"), derive_seed(7, "dropout"));
        assert_ne!(derive_seed(7, "shuffle"), derive_seed(8, "shuffle"));
    }

    #[test]
    fn derivation_is_stable() {
        // Frozen: training determinism depends on this mapping never changing.
        assert_eq!(derive_seed(42, "init"), derive_seed(42, "init"));
        let a: Vec<u64> = (0..4).map(|i| derive_seed(1, "x").wrapping_add(i)).collect();
        let b: Vec<u64> = (0..4).map(|i| derive_seed(1, "x").wrapping_add(i)).collect();
        assert_eq!(a, b);
    }
}
