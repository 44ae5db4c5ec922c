//! Seed handling.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded from a 64-bit
//! value. Sub-streams are derived from a master seed with [`derive_seed`],
//! a SplitMix64 finalizer applied to `master ^ golden * (stream + 1)`, so the
//! seed of a run depends only on `(master, stream)` and never on scheduling.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream tags used when splitting a seed inside one operation.
pub(crate) mod stream {
    pub const INIT: u64 = 1;
    pub const ORDER: u64 = 2;
    pub const RESTART: u64 = 3;
    pub const REFERENCE: u64 = 4;
    pub const CONTAMINATION: u64 = 5;
    pub const CENTERS: u64 = 6;
    pub const SAMPLE: u64 = 7;
    pub const TRIAL: u64 = 8;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of sub-stream `stream` from `master`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ GOLDEN.wrapping_mul(stream.wrapping_add(1)))
}

/// Two-level derivation, e.g. `(run seed, tag, index)`.
pub fn derive_seed2(master: u64, tag: u64, index: u64) -> u64 {
    derive_seed(derive_seed(master, tag), index)
}

pub fn rng_from(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly shuffled permutation of `0..n`.
pub(crate) fn shuffled_indices(n: usize, rng: &mut Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_across_streams() {
        let seeds: Vec<u64> = (0..100).map(|s| derive_seed(42, s)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
        assert_eq!(derive_seed(42, 7), derive_seed(42, 7));
        assert_ne!(derive_seed(42, 7), derive_seed(43, 7));
    }

    #[test]
    fn shuffle_is_reproducible() {
        let a = shuffled_indices(50, &mut rng_from(9));
        let b = shuffled_indices(50, &mut rng_from(9));
        assert_eq!(a, b);
        let mut s = a.clone();
        s.sort_unstable();
        assert_eq!(s, (0..50).collect::<Vec<_>>());
    }
}
