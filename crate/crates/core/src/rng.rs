//! Seeded, splittable random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the master seed and selected by
//! a 64-bit stream id, so a trial's randomness depends only on
//! `(master_seed, stream)` and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Name recorded in reports alongside the master seed.
pub const GENERATOR_NAME: &str = "chacha8-stream";

pub fn substream(master_seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child master seed so that independent experiments driven by one
/// seed do not share streams.
pub fn derive_seed(master_seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, mixed with the seed by splitmix64.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = master_seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
