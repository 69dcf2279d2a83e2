//! Seed derivation for reproducible randomness.
//!
//! Every randomized routine draws from a named sub-stream of one master
//! seed, so e.g. adding splitter restarts never perturbs what a generator
//! emits under the same seed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// RNG for sub-stream `stream` (e.g. "init", "restart", "synth1") at `index`.
pub fn derive_rng(seed: u64, stream: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(stream.as_bytes()).wrapping_add(index.wrapping_mul(0x9e3779b97f4a7c15)));
    rng
}
