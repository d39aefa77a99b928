//! Seeded random number generation shared by every stochastic stage.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate. Streams are stable across
/// platforms, which keeps rendered scans and detections bit-reproducible.
pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed from a parent seed and a path of
/// indices (scene number, scan number, ...). SplitMix64 finaliser.
pub fn derive_seed(parent: u64, path: &[u64]) -> u64 {
    let mut state = parent ^ 0x6a09_e667_f3bc_c909;
    for &p in path {
        state = mix(state.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(mix(p)));
    }
    mix(state)
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
