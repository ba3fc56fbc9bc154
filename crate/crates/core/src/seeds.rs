//! Deterministic seed derivation.
//!
//! Every random decision in the toolkit draws from a ChaCha stream derived
//! from a master seed, a purpose tag, and an index. Derivations depend only
//! on those three inputs, so any execution order (or thread count)
//! reproduces the same streams.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_tag(tag: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derives a child seed from `(master, tag, index)`.
pub fn derive(master: u64, tag: &str, index: u64) -> u64 {
    splitmix(splitmix(master ^ hash_tag(tag)) ^ index)
}

/// Derives an independent RNG stream from `(master, tag, index)`.
pub fn stream(master: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, tag, index))
}

/// Folds several seed components into one, order-sensitively.
pub fn mix(parts: &[u64], tag: &str) -> u64 {
    let mut acc = hash_tag(tag);
    for p in parts {
        acc = splitmix(acc ^ p);
    }
    acc
}
