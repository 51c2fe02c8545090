//! Deterministic RNG stream derivation.
//!
//! Every stochastic unit in the crate owns a stream derived from
//! `(root seed, module tag, index)`. Streams are independent of thread
//! scheduling, so any parallel loop that indexes its work items
//! reproduces the sequential result bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Derive an independent RNG stream from the root seed.
pub fn stream(root: u64, tag: &str, index: u64) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update([0xff]);
    hasher.update(tag.as_bytes());
    hasher.update([0xff]);
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(seed)
}
