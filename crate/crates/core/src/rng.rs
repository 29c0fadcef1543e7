//! Deterministic RNG streams.
//!
//! Every stochastic routine takes an explicit RNG; replica `i` of an
//! experiment with seed `s` uses `stream(s, i)`, so runs are reproducible
//! and replicas are independent regardless of scheduling order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub type SimRng = ChaCha12Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG stream for replica `index` of a run seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> SimRng {
    let mut state = seed ^ index.wrapping_mul(0xA076_1D64_78BD_642F);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    SimRng::from_seed(key)
}

/// Exponential variate with rate `lambda > 0`.
pub fn exp_rand(rng: &mut SimRng, lambda: f64) -> f64 {
    debug_assert!(lambda > 0.0);
    let u: f64 = rng.random();
    -(1.0 - u).ln() / lambda
}
