//! Deterministic random streams.
//!
//! Every source of randomness in the library is a ChaCha stream keyed by a
//! `(base seed, salt, index)` triple, so replications, per-node permutations
//! and random draws are reproducible and independent of evaluation order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives an independent stream from a base seed, a fixed purpose salt and
/// a stream index.
pub fn substream(base_seed: u64, salt: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&base_seed.to_le_bytes());
    key[8..16].copy_from_slice(&salt.to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// FNV-1a over a node set, used to decorrelate replication streams from the
/// evaluated seed set when common random numbers are disabled.
pub fn hash_nodes(nodes: &[u32]) -> u64 {
    let mut sorted: Vec<u32> = nodes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut h: u64 = 0xcbf29ce484222325;
    for v in sorted {
        for b in v.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}
