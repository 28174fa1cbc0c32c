//! Deterministic RNG substream derivation.
//!
//! Every stochastic component of the pipeline draws from a `ChaCha8Rng`
//! derived from a single master seed plus a list of integer tags
//! (domain constant, run index, iteration, particle index, ...). Two
//! substreams with different tag lists are statistically independent,
//! and a substream's output depends only on the master seed and its
//! tags — never on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain-separation tags for the pipeline stages.
pub mod domain {
    pub const RUN: u64 = 0x01;
    pub const SWARM_INIT: u64 = 0x02;
    pub const PARTICLE_MOVE: u64 = 0x03;
    pub const PBEST_TIE: u64 = 0x04;
    pub const ARCHIVE: u64 = 0x05;
    pub const GA_INIT: u64 = 0x06;
    pub const GA_GEN: u64 = 0x07;
    pub const FCM_INIT: u64 = 0x08;
    pub const OPT_STAGE: u64 = 0x09;
    pub const DECIDE_STAGE: u64 = 0x0a;
}

/// SplitMix64 finalizer; the standard 64-bit avalanche mix.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Fold a tag list into a derived 64-bit seed.
pub fn derive(master: u64, tags: &[u64]) -> u64 {
    let mut s = mix64(master);
    for &t in tags {
        s = mix64(s ^ mix64(t));
    }
    s
}

/// RNG for the substream identified by `tags` under `master`.
pub fn substream(master: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, tags))
}
