//! Named, indexed RNG substreams.
//!
//! Every randomized stage of the pipeline draws from its own ChaCha8 stream,
//! keyed by a master seed, a stage label, and integer indices (component,
//! shard, trial, ...). Streams for distinct keys are independent for all
//! practical purposes, and the derivation is a pure function of the key, so
//! results never depend on scheduling or on how much randomness an unrelated
//! stage consumed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a ChaCha8 generator from `(seed, label, indices)`.
///
/// The key material is hashed with FNV-1a and expanded with splitmix64 into
/// the 32-byte ChaCha seed. Labels are part of the hash, so
/// `substream(s, "sample", &[0])` and `substream(s, "jacobian", &[0])` are
/// unrelated streams even at equal indices.
pub fn substream(seed: u64, label: &str, indices: &[u64]) -> ChaCha8Rng {
    let mut h = FNV_OFFSET;
    h = fnv1a(h, &seed.to_le_bytes());
    h = fnv1a(h, label.as_bytes());
    for &ix in indices {
        h = fnv1a(h, &ix.to_le_bytes());
    }
    let mut state = h;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
