//! Seeded random streams.
//!
//! Every parallel unit of work (a tree, a k-means restart, a permutation
//! replicate) draws from its own ChaCha stream derived from the master seed
//! and the unit's index, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` of the generator family rooted at `seed`.
pub fn stream(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A child seed for handing a seed to a nested procedure.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    use rand::RngCore;
    let mut rng = stream(seed, tag.wrapping_add(1 << 40));
    rng.next_u64()
}
