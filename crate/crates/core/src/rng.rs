//! Seeded random number generation shared across the workspace.
//!
//! Every stochastic component derives its generator from a user seed and a
//! stream tag so that independent components never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for `seed` on the named stream.
pub fn seeded(seed: u64, stream: &str) -> Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, stream))
}

/// Stable 64-bit mix of a seed and a stream tag (FNV-1a over the tag, then splitmix).
pub fn mix(seed: u64, stream: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stream.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
