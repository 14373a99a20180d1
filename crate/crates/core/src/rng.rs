//! Reproducible random streams for trajectory ensembles.
//!
//! Every trajectory is addressed by `(master_seed, init_index, noise_index)`.
//! The triple is written directly into a ChaCha key, so streams never depend
//! on scheduling, thread count or how many other trajectories were drawn.
//! Initial conditions use a key without the noise index, which makes all
//! trajectories with the same `init_index` start from the same state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const DOMAIN_INIT: u64 = 0x696e_6974_6961_6c00; // "initial"
const DOMAIN_NOISE: u64 = 0x6e6f_6973_6500_0000; // "noise"

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub init_index: u64,
    pub noise_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, init_index: u64, noise_index: u64) -> Self {
        Self { master_seed, init_index, noise_index }
    }

    /// Generator for the initial phase-space sample.
    pub fn initial_rng(&self) -> ChaCha8Rng {
        keyed(self.master_seed, DOMAIN_INIT, self.init_index, 0)
    }

    /// Generator for the cavity input noise.
    pub fn noise_rng(&self) -> ChaCha8Rng {
        keyed(self.master_seed, DOMAIN_NOISE, self.init_index, self.noise_index)
    }
}

fn keyed(a: u64, b: u64, c: u64, d: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    for (chunk, word) in seed.chunks_exact_mut(8).zip([a, b, c, d]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
