//! Seeded randomness streams.
//!
//! Every logical party owns its own ChaCha20 stream derived from the master
//! seed, a domain label and an index, so results do not depend on the order
//! in which parties are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha20Rng;

/// Derives an independent stream for `(seed, domain, index)`.
pub fn stream(seed: u64, domain: &str, index: u64) -> StreamRng {
    let mut hasher = Sha256::new();
    hasher.update(b"fairagg/rng/v1");
    hasher.update((domain.len() as u64).to_le_bytes());
    hasher.update(domain.as_bytes());
    hasher.update(seed.to_le_bytes());
    hasher.update(index.to_le_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha20Rng::from_seed(digest)
}

/// Derives a child seed, used when a component needs to hand a plain `u64`
/// seed to something further down.
pub fn child_seed(seed: u64, domain: &str, index: u64) -> u64 {
    use rand::RngCore;
    stream(seed, domain, index).next_u64()
}
