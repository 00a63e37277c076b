//! Reproducible random streams.
//!
//! Every random consumer (a source block, the channel, a Monte-Carlo trial)
//! draws from its own ChaCha8 stream. The 64-bit stream seed is derived from
//! the run seed, a stream identifier and an index with SplitMix64 so that
//! trials can run in any order or in parallel and still see the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier recorded in result manifests.
pub const RNG_ALGORITHM: &str = "chacha8(rand_chacha-0.9)";

/// Seed derivation rule recorded in result manifests.
pub const SEED_DERIVATION: &str =
    "seed(stream,index) = splitmix64(splitmix64(master ^ fnv1a64(stream)) ^ index)";

pub type StreamRng = ChaCha8Rng;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fnv1a64(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seed for item `index` of the named stream under `master`.
pub fn derive_seed(master: u64, stream: &str, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ fnv1a64(stream)) ^ index)
}

pub fn stream_rng(master: u64, stream: &str, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream, index))
}
